//! Laurent polynomials over atoms: the normal form used by the simplifier.
//!
//! An atom is the variable, a parameter, or any non-polynomial subtree
//! (`exp`, `ln`, `abs`, `sqrt`, fractional powers of sums, numeric nodes).
//! Atoms are identified by a rendering key.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::print::render;
use super::Expr;
use crate::env::LinForm;
use crate::number::Number;

pub(crate) type Mono = BTreeMap<String, BigRational>;

const VAR_KEY: &str = "0";
const KEY_VAR_NAME: &str = "\u{1}v";

#[derive(Clone, Debug, Default)]
pub(crate) struct Poly {
    pub terms: BTreeMap<Mono, Number>,
    pub atoms: BTreeMap<String, Expr>,
}

fn atom_key(e: &Expr) -> String {
    match e {
        Expr::Var => VAR_KEY.to_string(),
        Expr::Param(p) => format!("1{p}"),
        other => format!("2{}", render(other, KEY_VAR_NAME)),
    }
}

impl Poly {
    pub fn constant(n: Number) -> Poly {
        let mut p = Poly::default();
        if !n.is_zero() {
            p.terms.insert(Mono::new(), n);
        }
        p
    }

    pub fn atom(e: Expr) -> Poly {
        let key = atom_key(&e);
        let mut p = Poly::default();
        let mut m = Mono::new();
        m.insert(key.clone(), BigRational::one());
        p.terms.insert(m, Number::one());
        p.atoms.insert(key, e);
        p
    }

    /// The monomial with the given atom exponents, atoms looked up by key.
    pub fn monomial(m: Mono, atoms: &BTreeMap<String, Expr>) -> Poly {
        let mut p = Poly::default();
        for k in m.keys() {
            p.atoms.insert(k.clone(), atoms[k].clone());
        }
        p.terms.insert(m, Number::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Number> {
        match self.terms.len() {
            0 => Some(Number::zero()),
            1 => self.terms.get(&Mono::new()).cloned(),
            _ => None,
        }
    }

    fn merge_atoms(&mut self, o: &Poly) {
        for (k, v) in &o.atoms {
            self.atoms.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }

    fn push(&mut self, m: Mono, c: Number) {
        let e = self.terms.remove(&m);
        let v = match e {
            Some(old) => old.add(&c),
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(m, v);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        out.merge_atoms(o);
        for (m, c) in &o.terms {
            out.push(m.clone(), c.clone());
        }
        out.gc();
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        out.merge_atoms(o);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut m = ma.clone();
                for (k, e) in mb {
                    let v = m.remove(k).unwrap_or_else(BigRational::zero) + e;
                    if !v.is_zero() {
                        m.insert(k.clone(), v);
                    }
                }
                out.push(m, ca.mul(cb));
            }
        }
        out.gc();
        out
    }

    fn gc(&mut self) {
        let used: Vec<String> = self.atoms.keys().cloned().collect();
        for k in used {
            if !self.terms.keys().any(|m| m.contains_key(&k)) {
                self.atoms.remove(&k);
            }
        }
    }

    /// Single-term inverse, when the polynomial is a single monomial.
    pub fn recip(&self) -> Option<Poly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        let inv_c = Number::one().div(c).ok()?;
        let inv_m: Mono = m.iter().map(|(k, e)| (k.clone(), -e)).collect();
        let mut out = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        out.terms.insert(inv_m, inv_c);
        Some(out)
    }

    /// Integer power; expands sums for small positive exponents.
    pub fn powi(&self, k: i64) -> Option<Poly> {
        if k == 0 {
            return Some(Poly::constant(Number::one()));
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next()?;
            let kr = BigRational::from_integer(BigInt::from(k));
            let cc = c.pow(&kr).ok()?;
            let mm: Mono = m.iter().map(|(key, e)| (key.clone(), e * &kr)).collect();
            let mut out = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
            out.terms.insert(mm, cc);
            return Some(out);
        }
        if (1..=8).contains(&k) {
            let mut acc = self.clone();
            for _ in 1..k {
                acc = acc.mul(self);
            }
            return Some(acc);
        }
        None
    }

    /// Fractional power of a single monomial, when it can be taken termwise
    /// without changing values: coefficient 1 or an exact positive root, and
    /// each atom exponent with odd numerator.
    pub fn pow_frac(&self, k: &BigRational) -> Option<Poly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if !m.values().all(|e| e.numer() % 2u32 != BigInt::zero()) {
            return None;
        }
        let cc = if c.is_one() { Number::one() } else { Number::Rational(exact_root_pow(c.as_rational()?, k)?) };
        let mm: Mono = m.iter().map(|(key, e)| (key.clone(), e * k)).filter(|(_, e)| !e.is_zero()).collect();
        let mut out = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        out.terms.insert(mm, cc);
        out.gc();
        Some(out)
    }

    fn var_degree(m: &Mono) -> BigRational {
        m.get(VAR_KEY).cloned().unwrap_or_else(BigRational::zero)
    }

    fn mono_has_var(&self, m: &Mono) -> bool {
        m.keys().any(|k| k == VAR_KEY || self.atoms.get(k).is_some_and(Expr::has_var))
    }

    /// `(a, b)` with the polynomial equal to `a*x + b` and `a`, `b` free of x.
    pub fn affine_in_var(&self) -> Option<(Poly, Poly)> {
        let mut a = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        let mut b = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        for (m, c) in &self.terms {
            let deg = Poly::var_degree(m);
            let mut rest = m.clone();
            rest.remove(VAR_KEY);
            if self.mono_has_var(&rest) {
                return None;
            }
            if deg.is_zero() {
                b.push(rest, c.clone());
            } else if deg.is_one() {
                a.push(rest, c.clone());
            } else {
                return None;
            }
        }
        a.gc();
        b.gc();
        Some((a, b))
    }

    /// Split into (terms that involve the variable, the rest).
    pub fn split_var(&self) -> (Poly, Poly) {
        let mut with = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        let mut without = Poly { terms: BTreeMap::new(), atoms: self.atoms.clone() };
        for (m, c) in &self.terms {
            if self.mono_has_var(m) {
                with.push(m.clone(), c.clone());
            } else {
                without.push(m.clone(), c.clone());
            }
        }
        with.gc();
        without.gc();
        (with, without)
    }

    /// The single monomial of a one-term polynomial as (coefficient,
    /// [(atom, exponent)]).
    pub fn single_term(&self) -> Option<(Number, Vec<(Expr, BigRational)>)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        let factors = m.iter().map(|(k, e)| (self.atoms[k].clone(), e.clone())).collect();
        Some((c.clone(), factors))
    }

    /// Iterate terms as (coefficient, factors).
    pub fn term_list(&self) -> Vec<(Number, Vec<(Expr, BigRational)>)> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let f = m.iter().map(|(k, e)| (self.atoms[k].clone(), e.clone())).collect();
                (c.clone(), f)
            })
            .collect()
    }

    pub fn from_expr(e: &Expr) -> Option<Poly> {
        if e.has_inf() {
            return None;
        }
        Some(super::simplify::to_poly(e))
    }

    pub fn to_linform(&self) -> Option<LinForm> {
        let mut out = LinForm::default();
        for (m, c) in &self.terms {
            let c = c.as_rational()?.clone();
            match m.len() {
                0 => out.constant += c,
                1 => {
                    let (k, e) = m.iter().next()?;
                    if !e.is_one() {
                        return None;
                    }
                    match &self.atoms[k] {
                        Expr::Param(p) => {
                            out = out.add(&LinForm::param(p).scale(&c));
                        }
                        _ => return None,
                    }
                }
                _ => return None,
            }
        }
        Some(out)
    }

    /// Render back to an expression tree in a stable order: terms with the
    /// variable first (highest degree first), then parameters, then the
    /// constant.
    pub fn to_expr(&self) -> Expr {
        if let Some(c) = self.as_constant() {
            return Expr::Num(c);
        }
        let mut terms: Vec<(&Mono, &Number)> = self.terms.iter().collect();
        terms.sort_by(|(ma, _), (mb, _)| {
            let ka = self.sort_key(ma);
            let kb = self.sort_key(mb);
            ka.cmp(&kb)
        });
        let mut acc: Option<Expr> = None;
        for (m, c) in terms {
            let neg = c.is_negative();
            let mag = c.abs();
            let t = self.term_expr(m, &mag);
            acc = Some(match acc {
                None => {
                    if neg {
                        Expr::neg(t)
                    } else {
                        t
                    }
                }
                Some(a) => {
                    if neg {
                        Expr::sub(a, t)
                    } else {
                        Expr::add(a, t)
                    }
                }
            });
        }
        acc.unwrap_or_else(|| Expr::int(0))
    }

    fn sort_key(&self, m: &Mono) -> (u8, BigRational, String) {
        let deg = Poly::var_degree(m);
        let class = if self.mono_has_var(m) {
            0
        } else if m.is_empty() {
            2
        } else {
            1
        };
        let keys: Vec<&str> = m.keys().map(|s| s.as_str()).collect();
        (class, -deg, keys.join(","))
    }

    fn term_expr(&self, m: &Mono, mag: &Number) -> Expr {
        let mut num: Vec<Expr> = Vec::new();
        let mut den: Vec<Expr> = Vec::new();
        for (k, e) in m {
            let a = self.atoms[k].clone();
            let target = if e.is_negative() { &mut den } else { &mut num };
            let ea = e.abs();
            target.push(if ea.is_one() { a } else { Expr::pow(a, ea) });
        }
        if m.is_empty() {
            return Expr::Num(mag.clone());
        }
        let (top_c, bot_c) = match mag {
            Number::Rational(r) => (
                Number::Rational(BigRational::from_integer(r.numer().clone())),
                Number::Rational(BigRational::from_integer(r.denom().clone())),
            ),
            d => (d.clone(), Number::one()),
        };
        if !top_c.is_one() || num.is_empty() {
            num.insert(0, Expr::Num(top_c));
        }
        if !bot_c.is_one() {
            den.insert(0, Expr::Num(bot_c));
        }
        let prod = |v: Vec<Expr>| v.into_iter().reduce(Expr::mul);
        let top = prod(num).unwrap_or_else(|| Expr::int(1));
        match prod(den) {
            None => top,
            Some(b) => Expr::div(top, b),
        }
    }
}

/// `c^k` when it is an exact rational and `c > 0`.
fn exact_root_pow(c: &BigRational, k: &BigRational) -> Option<BigRational> {
    if !c.is_positive() {
        return None;
    }
    let q = k.denom().to_u32()?;
    let rn = c.numer().nth_root(q);
    let rd = c.denom().nth_root(q);
    if num_traits::pow(rn.clone(), q as usize) != *c.numer() || num_traits::pow(rd.clone(), q as usize) != *c.denom() {
        return None;
    }
    let base = BigRational::new(rn, rd);
    let p = k.numer().to_i32()?;
    Some(num_traits::pow::Pow::pow(&base, p))
}
