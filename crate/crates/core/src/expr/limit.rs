//! One-sided limits and limits at infinity.
//!
//! A finite approach point `a` is rewritten as `x = a ± t` with `t -> 0+`,
//! and `-inf` as `x = -t` with `t -> +inf`, so the engine only ever handles
//! two modes. Zeros carry the side they are approached from so that `1/0`
//! forms resolve to a signed infinity.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::eval::params_f64;
use super::poly::Poly;
use super::{differentiate, eval_f64, sign_of, simplify, Bound, Expr};
use crate::env::{AssumptionEnv, Cmp};
use crate::error::{Error, Result};

/// Where the variable tends.
#[derive(Clone, Debug, PartialEq)]
pub enum Approach {
    /// From below a finite point.
    Left(Expr),
    /// From above a finite point.
    Right(Expr),
    PosInf,
    NegInf,
}

/// The limit of `e` as the variable follows `at`. Parameter signs come from
/// `env`; anything the engine cannot settle is an error rather than a guess.
pub fn limit(e: &Expr, at: &Approach, env: &AssumptionEnv) -> Result<Bound> {
    if e.is_inf() {
        return Ok(Bound::PosInf);
    }
    if !e.has_var() {
        return Ok(Bound::Finite(simplify(e)));
    }
    let t = Expr::Var;
    let (sub, mode) = match at {
        Approach::Right(a) => (e.subst_var(&Expr::add(a.clone(), t)), Mode::Zero),
        Approach::Left(a) => (e.subst_var(&Expr::sub(a.clone(), t)), Mode::Zero),
        Approach::PosInf => (e.clone(), Mode::Inf),
        Approach::NegInf => (e.subst_var(&Expr::neg(t)), Mode::Inf),
    };
    let ctx = Ctx { env, mode };
    let sub = simplify(&sub);
    let out = match ctx.lim(&sub, 0)? {
        Lim::Val(v) => Bound::Finite(v),
        Lim::Zero(_) => Bound::Finite(Expr::int(0)),
        Lim::PosInf => Bound::PosInf,
        Lim::NegInf => Bound::NegInf,
    };
    if !plausible(e, at, &out, env) {
        return Err(Error::Unsupported(format!("limit of {e} failed its numeric check")));
    }
    Ok(out)
}

/// Guardrail against rewriting mistakes: along the approach, sampled values
/// must move toward the claimed limit (or already be close to it).
fn approach_point(at: &Approach) -> Expr {
    match at {
        Approach::Left(a) | Approach::Right(a) => a.clone(),
        _ => Expr::int(0),
    }
}

fn plausible(e: &Expr, at: &Approach, out: &Bound, env: &AssumptionEnv) -> bool {
    let mut names: Vec<String> = e.params().into_iter().collect();
    for b in [out, &Bound::Finite(approach_point(at))] {
        if let Bound::Finite(v) = b {
            names.extend(v.params());
        }
    }
    let pf = params_f64(&env.witness(&names));
    let Ok(a) = eval_f64(&approach_point(at), 0.0, &pf) else {
        return true;
    };
    let (near, far) = match at {
        Approach::Right(_) => (a + 1e-3, a + 1e-5),
        Approach::Left(_) => (a - 1e-3, a - 1e-5),
        Approach::PosInf => (1e3, 1e6),
        Approach::NegInf => (-1e3, -1e6),
    };
    let (Ok(f1), Ok(f2)) = (eval_f64(e, near, &pf), eval_f64(e, far, &pf)) else {
        return true;
    };
    if !f1.is_finite() || !f2.is_finite() {
        return true;
    }
    match out {
        Bound::Finite(v) => {
            let Ok(l) = eval_f64(v, 0.0, &pf) else {
                return true;
            };
            let d2 = (f2 - l).abs();
            d2 <= 1e-3 * (1.0 + l.abs()) || d2 <= (f1 - l).abs()
        }
        Bound::PosInf => f2 > 0.0 && (f2 >= f1 || f2 > 1e3),
        Bound::NegInf => f2 < 0.0 && (f2 <= f1 || f2 < -1e3),
    }
}

const MAX_DEPTH: usize = 8;

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Zero,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Dir {
    Pos,
    Neg,
    Exact,
    Unknown,
}

impl Dir {
    fn flip(self) -> Dir {
        match self {
            Dir::Pos => Dir::Neg,
            Dir::Neg => Dir::Pos,
            d => d,
        }
    }

    fn times(self, s: i8) -> Dir {
        if s < 0 {
            self.flip()
        } else {
            self
        }
    }

    fn mul(self, o: Dir) -> Dir {
        match (self, o) {
            (Dir::Exact, _) | (_, Dir::Exact) => Dir::Exact,
            (Dir::Unknown, _) | (_, Dir::Unknown) => Dir::Unknown,
            (a, b) if a == b => Dir::Pos,
            _ => Dir::Neg,
        }
    }

    fn sign(self) -> Option<i8> {
        match self {
            Dir::Pos => Some(1),
            Dir::Neg => Some(-1),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Lim {
    /// A finite nonzero value (or one whose zeroness is not evident).
    Val(Expr),
    Zero(Dir),
    PosInf,
    NegInf,
}

impl Lim {
    fn inf(sign: i8) -> Lim {
        if sign > 0 {
            Lim::PosInf
        } else {
            Lim::NegInf
        }
    }

    fn neg(self) -> Lim {
        match self {
            Lim::Val(v) => Lim::Val(simplify(&Expr::neg(v))),
            Lim::Zero(d) => Lim::Zero(d.flip()),
            Lim::PosInf => Lim::NegInf,
            Lim::NegInf => Lim::PosInf,
        }
    }

    fn is_inf(&self) -> bool {
        matches!(self, Lim::PosInf | Lim::NegInf)
    }
}

fn val(e: Expr) -> Lim {
    let s = simplify(&e);
    if s.is_zero() {
        Lim::Zero(Dir::Unknown)
    } else {
        Lim::Val(s)
    }
}

fn bound_lim(b: &Bound) -> Lim {
    match b {
        Bound::NegInf => Lim::NegInf,
        Bound::PosInf => Lim::PosInf,
        Bound::Finite(v) => val(v.clone()),
    }
}

/// `e = n/d` with `d` the product of all negative powers in `e`.
fn together(e: &Expr) -> Option<(Expr, Expr)> {
    let p = Poly::from_expr(e)?;
    let mut worst: std::collections::BTreeMap<String, BigRational> = Default::default();
    for m in p.terms.keys() {
        for (k, x) in m {
            if x.is_negative() {
                let w = worst.entry(k.clone()).or_insert_with(BigRational::zero);
                if *x < *w {
                    *w = x.clone();
                }
            }
        }
    }
    if worst.is_empty() {
        return None;
    }
    let mut mono = std::collections::BTreeMap::new();
    for (k, x) in worst {
        mono.insert(k, -x);
    }
    let d = Poly::monomial(mono, &p.atoms);
    Some((p.mul(&d).to_expr(), d.to_expr()))
}

struct Ctx<'a> {
    env: &'a AssumptionEnv,
    mode: Mode,
}

impl Ctx<'_> {
    fn sign(&self, v: &Expr) -> Result<i8> {
        match sign_of(v, self.env) {
            Cmp::Greater => Ok(1),
            Cmp::Less => Ok(-1),
            Cmp::Equal => Ok(0),
            Cmp::Undecidable => Err(Error::UndecidableComparison(v.to_string(), "0".into())),
        }
    }

    fn indeterminate(&self, what: &str, e: &Expr) -> Error {
        Error::Unsupported(format!("indeterminate {what} in the limit of {e}"))
    }

    fn lim(&self, e: &Expr, depth: usize) -> Result<Lim> {
        if depth > MAX_DEPTH {
            return Err(self.indeterminate("form", e));
        }
        if !e.has_var() {
            let s = simplify(e);
            return Ok(if s.is_zero() { Lim::Zero(Dir::Exact) } else { Lim::Val(s) });
        }
        match e {
            Expr::Var => Ok(match self.mode {
                Mode::Zero => Lim::Zero(Dir::Pos),
                Mode::Inf => Lim::PosInf,
            }),
            Expr::Neg(a) => Ok(self.lim(a, depth)?.neg()),
            Expr::Add(a, b) => self.sum(e, a, b, false, depth),
            Expr::Sub(a, b) => self.sum(e, a, b, true, depth),
            Expr::Mul(a, b) => self.product(e, a, b, depth),
            Expr::Div(a, b) => self.quotient(e, a, b, depth),
            Expr::Pow(a, k) => {
                let la = self.lim(a, depth)?;
                let k_pos = k.numer() > &0.into();
                let odd = k.numer() % 2 != 0.into();
                let even_root = k.denom() % 2 == 0.into();
                Ok(match la {
                    Lim::Val(v) => val(Expr::pow(v, k.clone())),
                    Lim::Zero(d) => {
                        let d = if even_root || !odd { Dir::Pos } else { d };
                        if k_pos {
                            Lim::Zero(d)
                        } else {
                            match d.sign() {
                                Some(s) => Lim::inf(s),
                                None => match self.zero_dir(a, depth + 1).sign() {
                                    Some(s) => Lim::inf(if odd { s } else { 1 }),
                                    None => return Err(self.indeterminate("1/0", e)),
                                },
                            }
                        }
                    }
                    Lim::PosInf => {
                        if k_pos {
                            Lim::PosInf
                        } else {
                            Lim::Zero(Dir::Pos)
                        }
                    }
                    Lim::NegInf => {
                        if even_root {
                            return Err(Error::Domain(format!("even root of a negative tail in {e}")));
                        }
                        match (k_pos, odd) {
                            (true, true) => Lim::NegInf,
                            (true, false) => Lim::PosInf,
                            (false, true) => Lim::Zero(Dir::Neg),
                            (false, false) => Lim::Zero(Dir::Pos),
                        }
                    }
                })
            }
            Expr::Sqrt(a) => self.lim(&Expr::pow((**a).clone(), super::rat(1, 2)), depth),
            Expr::Exp(a) => Ok(match self.lim(a, depth)? {
                Lim::Val(v) => val(Expr::exp(v)),
                Lim::Zero(_) => Lim::Val(Expr::int(1)),
                Lim::PosInf => Lim::PosInf,
                Lim::NegInf => Lim::Zero(Dir::Pos),
            }),
            Expr::Ln(a) => Ok(match self.lim(a, depth)? {
                Lim::Val(v) => {
                    if self.sign(&v)? <= 0 {
                        return Err(Error::Domain(format!("ln of a nonpositive limit in {e}")));
                    }
                    val(Expr::ln(v))
                }
                Lim::Zero(d) => {
                    let d = if d == Dir::Unknown { self.zero_dir(a, depth + 1) } else { d };
                    match d {
                        Dir::Pos => Lim::NegInf,
                        _ => return Err(Error::Domain(format!("ln near a nonpositive value in {e}"))),
                    }
                }
                Lim::PosInf => Lim::PosInf,
                Lim::NegInf => return Err(Error::Domain(format!("ln of a negative tail in {e}"))),
            }),
            Expr::Abs(a) => Ok(match self.lim(a, depth)? {
                Lim::Val(v) => val(Expr::abs(v)),
                Lim::Zero(Dir::Exact) => Lim::Zero(Dir::Exact),
                Lim::Zero(_) => Lim::Zero(Dir::Pos),
                _ => Lim::PosInf,
            }),
            Expr::Implicit(inv, a) => match self.lim(a, depth)? {
                Lim::Val(v) => Ok(Lim::Val(e.map_arg(v))),
                Lim::Zero(_) => Ok(val(e.map_arg(Expr::int(0)))),
                // An increasing inverse tends to the ends of its range.
                Lim::PosInf => Ok(bound_lim(&inv.hi)),
                Lim::NegInf => Ok(bound_lim(&inv.lo)),
            },
            Expr::Integral(_, a) => match self.lim(a, depth)? {
                Lim::Val(v) => Ok(Lim::Val(e.map_arg(v))),
                Lim::Zero(_) => Ok(val(e.map_arg(Expr::int(0)))),
                _ => Err(Error::Unsupported(format!("limit of a numeric antiderivative {e}"))),
            },
            Expr::Inf => Ok(Lim::PosInf),
            Expr::Num(_) | Expr::Param(_) => unreachable!("constants handled above"),
        }
    }

    fn sum(&self, whole: &Expr, a: &Expr, b: &Expr, minus: bool, depth: usize) -> Result<Lim> {
        let la = self.lim(a, depth)?;
        let mut lb = self.lim(b, depth)?;
        if minus {
            lb = lb.neg();
        }
        let a_pos = matches!(la, Lim::PosInf);
        Ok(match (la, lb) {
            (Lim::PosInf, Lim::NegInf) | (Lim::NegInf, Lim::PosInf) => {
                let b_signed = if minus { (*b).clone() } else { Expr::neg((*b).clone()) };
                // a + b with a, -b of like sign: compare their sizes.
                let ratio = simplify(&Expr::div((*a).clone(), b_signed));
                let s = if a_pos { 1 } else { -1 };
                match self.lim(&ratio, depth + 1)? {
                    Lim::PosInf => Lim::inf(s),
                    Lim::Zero(_) => Lim::inf(-s),
                    Lim::Val(c) => match self.sign(&simplify(&Expr::sub(c, Expr::int(1))))? {
                        1 => Lim::inf(s),
                        -1 => Lim::inf(-s),
                        // Same growth: bring to a common denominator.
                        _ => match together(whole) {
                            Some((n, d)) => self.quotient(whole, &n, &d, depth + 1)?,
                            None => return Err(self.indeterminate("inf - inf", whole)),
                        },
                    },
                    Lim::NegInf => return Err(Error::Internal(format!("sign mix-up in {whole}"))),
                }
            }
            (x, Lim::Zero(_)) if x.is_inf() => x,
            (Lim::Zero(_), y) if y.is_inf() => y,
            (x, Lim::Val(_)) if x.is_inf() => x,
            (Lim::Val(_), y) if y.is_inf() => y,
            (x, y) if x.is_inf() && y.is_inf() => x,
            (Lim::Val(u), Lim::Val(v)) => match val(Expr::add(u, v)) {
                Lim::Zero(_) => Lim::Zero(self.zero_dir(whole, depth + 1)),
                l => l,
            },
            (Lim::Val(u), Lim::Zero(_)) | (Lim::Zero(_), Lim::Val(u)) => Lim::Val(u),
            (Lim::Zero(x), Lim::Zero(y)) => Lim::Zero(match (x, y) {
                (Dir::Exact, d) | (d, Dir::Exact) => d,
                (a, b) if a == b => a,
                _ => self.zero_dir(whole, depth + 1),
            }),
            _ => unreachable!(),
        })
    }

    fn product(&self, whole: &Expr, a: &Expr, b: &Expr, depth: usize) -> Result<Lim> {
        let la = self.lim(a, depth)?;
        let lb = self.lim(b, depth)?;
        Ok(match (la, lb) {
            (Lim::Zero(Dir::Exact), _) | (_, Lim::Zero(Dir::Exact)) => Lim::Zero(Dir::Exact),
            (Lim::Val(u), Lim::Val(v)) => val(Expr::mul(u, v)),
            (Lim::Val(u), Lim::Zero(d)) | (Lim::Zero(d), Lim::Val(u)) => Lim::Zero(d.times(self.sign(&u)?)),
            (Lim::Val(u), y) | (y, Lim::Val(u)) => {
                let s = self.sign(&u)?;
                if matches!(y, Lim::PosInf) {
                    Lim::inf(s)
                } else {
                    Lim::inf(-s)
                }
            }
            (Lim::Zero(x), Lim::Zero(y)) => Lim::Zero(x.mul(y)),
            (Lim::Zero(_), _) | (_, Lim::Zero(_)) => {
                // 0 * inf: try both quotient rewrites.
                let ib = simplify(&Expr::powi(b.clone(), -1));
                match self.quotient(whole, a, &ib, depth + 1) {
                    Ok(l) => l,
                    Err(_) => {
                        let ia = simplify(&Expr::powi(a.clone(), -1));
                        self.quotient(whole, b, &ia, depth + 1).map_err(|_| self.indeterminate("0*inf", whole))?
                    }
                }
            }
            (x, y) => {
                if matches!(x, Lim::PosInf) == matches!(y, Lim::PosInf) {
                    Lim::PosInf
                } else {
                    Lim::NegInf
                }
            }
        })
    }

    fn quotient(&self, whole: &Expr, a: &Expr, b: &Expr, depth: usize) -> Result<Lim> {
        let la = self.lim(a, depth)?;
        let lb = self.lim(b, depth)?;
        Ok(match (la, lb) {
            (_, Lim::Zero(Dir::Exact)) => return Err(Error::Domain(format!("division by zero in {whole}"))),
            (Lim::Zero(Dir::Exact), _) => Lim::Zero(Dir::Exact),
            (Lim::Val(u), Lim::Val(v)) => val(Expr::div(u, v)),
            (Lim::Zero(_), Lim::Zero(_)) => self.lhopital(whole, a, b, depth)?,
            (x, y) if x.is_inf() && y.is_inf() => self.lhopital(whole, a, b, depth)?,
            (Lim::Zero(d), Lim::Val(v)) => Lim::Zero(d.times(self.sign(&v)?)),
            (Lim::Val(u), Lim::Zero(d)) => {
                let d = if d == Dir::Unknown { self.zero_dir(b, depth + 1) } else { d };
                match d.sign() {
                    Some(s) => Lim::inf(s * self.sign(&u)?),
                    None => return Err(self.indeterminate("c/0", whole)),
                }
            }
            (Lim::Val(u), y) => {
                let s = self.sign(&u)?;
                Lim::Zero(if matches!(y, Lim::PosInf) { Dir::Pos } else { Dir::Neg }.times(s))
            }
            (Lim::Zero(d), y) if y.is_inf() => Lim::Zero(d.times(if matches!(y, Lim::PosInf) { 1 } else { -1 })),
            (x, Lim::Val(v)) => {
                let s = self.sign(&v)?;
                if matches!(x, Lim::PosInf) {
                    Lim::inf(s)
                } else {
                    Lim::inf(-s)
                }
            }
            (x, Lim::Zero(d)) => {
                let d = if d == Dir::Unknown { self.zero_dir(b, depth + 1) } else { d };
                match d.sign() {
                    Some(s) => {
                        if matches!(x, Lim::PosInf) {
                            Lim::inf(s)
                        } else {
                            Lim::inf(-s)
                        }
                    }
                    None => return Err(self.indeterminate("inf/0", whole)),
                }
            }
            _ => unreachable!(),
        })
    }

    /// `a/b` in a `0/0` or `inf/inf` form. Numerator and denominator are
    /// differentiated separately; the combined ratio is only used when it
    /// collapses to a single term.
    fn lhopital(&self, whole: &Expr, a: &Expr, b: &Expr, depth: usize) -> Result<Lim> {
        let da = differentiate(a)?;
        let db = differentiate(b)?;
        match self.quotient(whole, &da, &db, depth + 1) {
            Ok(l) => Ok(l),
            Err(e) => {
                let r = simplify(&Expr::div(da, db));
                match Poly::from_expr(&r) {
                    Some(p) if p.terms.len() <= 1 => self.lim(&r, depth + 1),
                    _ => Err(e),
                }
            }
        }
    }

    /// Side from which `e` tends to zero, from the sign of its derivative.
    fn zero_dir(&self, e: &Expr, depth: usize) -> Dir {
        if depth > MAX_DEPTH {
            return Dir::Unknown;
        }
        let Ok(d) = differentiate(e).map(|d| simplify(&d)) else {
            return Dir::Unknown;
        };
        if d.is_zero() {
            return Dir::Exact;
        }
        let Ok(l) = self.lim(&d, depth + 1) else {
            return Dir::Unknown;
        };
        let dir = match l {
            Lim::Val(v) => match self.sign(&v) {
                Ok(1) => Dir::Pos,
                Ok(-1) => Dir::Neg,
                _ => Dir::Unknown,
            },
            Lim::Zero(Dir::Unknown) => self.zero_dir(&d, depth + 1),
            Lim::Zero(x) => x,
            Lim::PosInf => Dir::Pos,
            Lim::NegInf => Dir::Neg,
        };
        match self.mode {
            Mode::Zero => dir,
            // Tending to zero at infinity: increasing means from below.
            Mode::Inf => dir.flip(),
        }
    }
}

impl Expr {
    /// Replace the argument of a numeric node.
    fn map_arg(&self, arg: Expr) -> Expr {
        match self {
            Expr::Implicit(inv, _) => Expr::Implicit(inv.clone(), Box::new(arg)),
            Expr::Integral(q, _) => Expr::Integral(q.clone(), Box::new(arg)),
            other => other.clone(),
        }
    }
}
