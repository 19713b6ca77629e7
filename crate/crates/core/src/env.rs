//! Order facts about named parameters and a sound decision procedure for
//! comparing parameter-affine quantities under them.
//!
//! Facts are linear inequalities with rational coefficients. Implication is
//! decided by Fourier-Motzkin elimination over exact rationals, tracking
//! strictness, which is complete for this fragment.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `constant + sum(coeff * param)` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinForm {
    pub constant: BigRational,
    pub coeffs: BTreeMap<String, BigRational>,
}

impl LinForm {
    pub fn constant(c: BigRational) -> Self {
        LinForm { constant: c, coeffs: BTreeMap::new() }
    }

    pub fn param(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), BigRational::one());
        LinForm { constant: BigRational::zero(), coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.constant += &o.constant;
        for (k, v) in &o.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert_with(BigRational::zero);
            *e += v;
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn scale(&self, s: &BigRational) -> LinForm {
        if s.is_zero() {
            return LinForm::default();
        }
        LinForm { constant: &self.constant * s, coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * s)).collect() }
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        self.add(&o.scale(&-BigRational::one()))
    }

    fn coeff(&self, name: &str) -> BigRational {
        self.coeffs.get(name).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, params: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = self.constant.clone();
        for (k, v) in &self.coeffs {
            acc += v * params.get(k)?;
        }
        Some(acc)
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.coeffs {
            let (neg, mag) = (v.is_negative(), v.abs());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if !mag.is_one() {
                write!(f, "{}*", fmt_rat(&mag))?;
            }
            f.write_str(k)?;
            first = false;
        }
        if first {
            return f.write_str(&fmt_rat(&self.constant));
        }
        if !self.constant.is_zero() {
            let neg = self.constant.is_negative();
            write!(f, "{}{}", if neg { " - " } else { " + " }, fmt_rat(&self.constant.abs()))?;
        }
        Ok(())
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
}

/// `lhs REL rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    pub lhs: LinForm,
    pub rel: Rel,
    pub rhs: LinForm,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.rel {
            Rel::Lt => "<",
            Rel::Le => "<=",
        };
        write!(f, "{} {} {}", self.lhs, r, self.rhs)
    }
}

/// Outcome of [`AssumptionEnv::compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Less,
    Equal,
    Greater,
    Undecidable,
}

impl Cmp {
    pub fn reverse(self) -> Cmp {
        match self {
            Cmp::Less => Cmp::Greater,
            Cmp::Greater => Cmp::Less,
            c => c,
        }
    }

    pub fn from_ordering(o: std::cmp::Ordering) -> Cmp {
        match o {
            std::cmp::Ordering::Less => Cmp::Less,
            std::cmp::Ordering::Equal => Cmp::Equal,
            std::cmp::Ordering::Greater => Cmp::Greater,
        }
    }
}

/// `form > 0` when strict, `form >= 0` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Constraint {
    form: LinForm,
    strict: bool,
}

/// A consistent finite set of order facts among parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssumptionEnv {
    facts: Vec<Fact>,
}

impl AssumptionEnv {
    pub fn empty() -> Self {
        AssumptionEnv::default()
    }

    pub fn new(facts: Vec<Fact>) -> Result<Self> {
        let env = AssumptionEnv { facts };
        if !feasible(&env.constraints()) {
            return Err(Error::InconsistentEnv);
        }
        Ok(env)
    }

    /// Add a fact, rejecting it if the result is inconsistent.
    pub fn with(&self, fact: Fact) -> Result<Self> {
        let mut facts = self.facts.clone();
        facts.push(fact);
        AssumptionEnv::new(facts)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Merge two environments (used when combining operators).
    pub fn union(&self, other: &AssumptionEnv) -> Result<Self> {
        let mut facts = self.facts.clone();
        for f in &other.facts {
            if !facts.contains(f) {
                facts.push(f.clone());
            }
        }
        AssumptionEnv::new(facts)
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for f in &self.facts {
            for k in f.lhs.coeffs.keys().chain(f.rhs.coeffs.keys()) {
                if !out.contains(k) {
                    out.push(k.clone());
                }
            }
        }
        out.sort();
        out
    }

    fn constraints(&self) -> Vec<Constraint> {
        self.facts.iter().map(|f| Constraint { form: f.rhs.sub(&f.lhs), strict: f.rel == Rel::Lt }).collect()
    }

    fn implied(&self, form: &LinForm, strict: bool) -> bool {
        // env => form (>|>=) 0  iff  env and not(form (>|>=) 0) is infeasible.
        let mut cs = self.constraints();
        cs.push(Constraint { form: form.scale(&-BigRational::one()), strict: !strict });
        !feasible(&cs)
    }

    /// Sound comparison of `a` and `b`: an order is returned only when it
    /// follows from the facts plus rational arithmetic.
    pub fn compare(&self, a: &LinForm, b: &LinForm) -> Result<Cmp> {
        let d = a.sub(b);
        if d.is_constant() {
            return Ok(Cmp::from_ordering(d.constant.cmp(&BigRational::zero())));
        }
        if !feasible(&self.constraints()) {
            return Err(Error::InconsistentEnv);
        }
        if self.implied(&d, true) {
            return Ok(Cmp::Greater);
        }
        let neg = d.scale(&-BigRational::one());
        if self.implied(&neg, true) {
            return Ok(Cmp::Less);
        }
        if self.implied(&d, false) && self.implied(&neg, false) {
            return Ok(Cmp::Equal);
        }
        Ok(Cmp::Undecidable)
    }

    /// A rational assignment of `names` satisfying every fact. Parameters not
    /// mentioned by any fact are set to 1.
    pub fn witness(&self, names: &[String]) -> BTreeMap<String, BigRational> {
        let mut vars = self.params();
        for n in names {
            if !vars.contains(n) {
                vars.push(n.clone());
            }
        }
        let cs = self.constraints();
        let mut stages: Vec<Vec<Constraint>> = vec![cs];
        for v in &vars {
            let next = eliminate(stages.last().unwrap(), v);
            stages.push(next);
        }
        let mut assign: BTreeMap<String, BigRational> = BTreeMap::new();
        for (k, v) in vars.iter().enumerate().rev() {
            let mut lo: Option<(BigRational, bool)> = None;
            let mut hi: Option<(BigRational, bool)> = None;
            for c in &stages[k] {
                let cv = c.form.coeff(v);
                if cv.is_zero() {
                    continue;
                }
                // cv*v + rest (>|>=) 0
                let mut rest = c.form.constant.clone();
                for (name, coef) in &c.form.coeffs {
                    if name != v {
                        rest += coef * assign.get(name).cloned().unwrap_or_else(BigRational::one);
                    }
                }
                let bound = -rest / &cv;
                if cv.is_positive() {
                    if lo.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && c.strict && !s)) {
                        lo = Some((bound, c.strict));
                    }
                } else if hi.as_ref().is_none_or(|(h, s)| bound < *h || (bound == *h && c.strict && !s)) {
                    hi = Some((bound, c.strict));
                }
            }
            let one = BigRational::one();
            let val = match (lo, hi) {
                (None, None) => one,
                (Some((l, _)), None) => {
                    if l < one {
                        one
                    } else {
                        l + one
                    }
                }
                (None, Some((h, _))) => {
                    if h > one {
                        one
                    } else {
                        h - one
                    }
                }
                (Some((l, _)), Some((h, _))) => {
                    if l == h {
                        l
                    } else {
                        (l + h) / BigRational::from_integer(BigInt::from(2))
                    }
                }
            };
            assign.insert(v.clone(), val);
        }
        assign.retain(|k, _| names.contains(k));
        assign
    }
}

fn eliminate(cs: &[Constraint], v: &str) -> Vec<Constraint> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for c in cs {
        let k = c.form.coeff(v);
        if k.is_positive() {
            pos.push((c, k));
        } else if k.is_negative() {
            neg.push((c, -k));
        } else {
            out.push(c.clone());
        }
    }
    for (p, kp) in &pos {
        for (n, kn) in &neg {
            let form = p.form.scale(&(BigRational::one() / kp)).add(&n.form.scale(&(BigRational::one() / kn)));
            let c = Constraint { form, strict: p.strict || n.strict };
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

fn feasible(cs: &[Constraint]) -> bool {
    let mut vars: Vec<String> = Vec::new();
    for c in cs {
        for k in c.form.coeffs.keys() {
            if !vars.contains(k) {
                vars.push(k.clone());
            }
        }
    }
    let mut cur = cs.to_vec();
    for v in &vars {
        cur = eliminate(&cur, v);
    }
    cur.iter().all(|c| {
        let z = BigRational::zero();
        if c.strict {
            c.form.constant > z
        } else {
            c.form.constant >= z
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(a: LinForm, b: LinForm) -> Fact {
        Fact { lhs: a, rel: Rel::Lt, rhs: b }
    }

    fn c(n: i64) -> LinForm {
        LinForm::constant(BigRational::from_integer(n.into()))
    }

    #[test]
    fn negated_positive_parameter_is_smaller() {
        let env = AssumptionEnv::new(vec![lt(c(0), LinForm::param("a"))]).unwrap();
        let a = LinForm::param("a");
        let minus_a = a.scale(&-BigRational::one());
        assert_eq!(env.compare(&minus_a, &a).unwrap(), Cmp::Less);
    }

    #[test]
    fn constants_compare_exactly() {
        let env = AssumptionEnv::empty();
        let half = LinForm::constant(BigRational::new(1.into(), 2.into()));
        let third = LinForm::constant(BigRational::new(1.into(), 3.into()));
        assert_eq!(env.compare(&half, &third).unwrap(), Cmp::Greater);
    }

    #[test]
    fn unconstrained_parameter_is_undecidable() {
        let env = AssumptionEnv::empty();
        assert_eq!(env.compare(&LinForm::param("a"), &c(0)).unwrap(), Cmp::Undecidable);
    }

    #[test]
    fn inconsistent_facts_are_rejected() {
        let a = LinForm::param("a");
        let r = AssumptionEnv::new(vec![lt(a.clone(), c(0)), lt(c(1), a)]);
        assert_eq!(r.unwrap_err(), Error::InconsistentEnv);
    }

    #[test]
    fn transitivity_through_chains() {
        let (a, b, d) = (LinForm::param("a"), LinForm::param("b"), LinForm::param("d"));
        let env = AssumptionEnv::new(vec![lt(a.clone(), b.clone()), lt(b, d.clone())]).unwrap();
        assert_eq!(env.compare(&a, &d).unwrap(), Cmp::Less);
        assert_eq!(env.compare(&d, &a).unwrap(), Cmp::Greater);
    }

    #[test]
    fn equality_from_two_weak_facts() {
        let (a, b) = (LinForm::param("a"), LinForm::param("b"));
        let env = AssumptionEnv::new(vec![
            Fact { lhs: a.clone(), rel: Rel::Le, rhs: b.clone() },
            Fact { lhs: b.clone(), rel: Rel::Le, rhs: a.clone() },
        ])
        .unwrap();
        assert_eq!(env.compare(&a, &b).unwrap(), Cmp::Equal);
    }

    #[test]
    fn witness_satisfies_facts() {
        let (a, b) = (LinForm::param("a"), LinForm::param("b"));
        let env = AssumptionEnv::new(vec![lt(a.clone(), b.clone()), lt(c(0), a.clone())]).unwrap();
        let w = env.witness(&["a".into(), "b".into()]);
        let av = a.eval(&w).unwrap();
        let bv = b.eval(&w).unwrap();
        assert!(av > BigRational::zero() && av < bv);
    }
}
