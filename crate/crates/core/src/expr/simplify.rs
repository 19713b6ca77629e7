use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::poly::Poly;
use super::Expr;
use crate::number::Number;

/// Canonical form: collect like terms, fold constants, cancel `exp`/`ln`
/// pairs. Values are preserved wherever the input is defined.
pub fn simplify(e: &Expr) -> Expr {
    if e.is_inf() {
        return Expr::Inf;
    }
    to_poly(e).to_expr()
}

pub(crate) fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Num(n) => Poly::constant(n.clone()),
        Expr::Var | Expr::Param(_) => Poly::atom(e.clone()),
        Expr::Inf => Poly::atom(Expr::Inf),
        Expr::Neg(a) => to_poly(a).neg(),
        Expr::Add(a, b) => to_poly(a).add(&to_poly(b)),
        Expr::Sub(a, b) => to_poly(a).add(&to_poly(b).neg()),
        Expr::Mul(a, b) => to_poly(a).mul(&to_poly(b)),
        Expr::Div(a, b) => {
            let pa = to_poly(a);
            let pb = to_poly(b);
            if pb.is_zero() {
                return Poly::atom(Expr::div(pa.to_expr(), Expr::int(0)));
            }
            match pb.recip() {
                Some(r) => pa.mul(&r),
                None => {
                    let den = Poly::atom(pb.to_expr());
                    pa.mul(&den.powi(-1).expect("monomial power"))
                }
            }
        }
        Expr::Pow(a, k) => pow_poly(to_poly(a), k),
        Expr::Exp(a) => {
            let s = simplify(a);
            match s {
                Expr::Ln(u) => to_poly(&u),
                s if s.is_zero() => Poly::constant(Number::one()),
                s => Poly::atom(Expr::exp(s)),
            }
        }
        Expr::Ln(a) => {
            let s = simplify(a);
            match s {
                Expr::Exp(u) => to_poly(&u),
                s if s.is_one() => Poly::constant(Number::zero()),
                s => Poly::atom(Expr::ln(s)),
            }
        }
        Expr::Sqrt(a) => {
            let s = simplify(a);
            if let Some(Number::Rational(r)) = s.as_number() {
                if !r.is_negative() {
                    let n = r.numer().sqrt();
                    let d = r.denom().sqrt();
                    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                        return Poly::constant(Number::Rational(BigRational::new(n, d)));
                    }
                }
            }
            Poly::atom(Expr::sqrt(s))
        }
        Expr::Abs(a) => {
            let s = simplify(a);
            match s.as_number() {
                Some(n) => Poly::constant(n.abs()),
                None => match s {
                    Expr::Abs(_) | Expr::Exp(_) => to_poly(&s),
                    s => Poly::atom(Expr::abs(s)),
                },
            }
        }
        Expr::Implicit(inv, a) => Poly::atom(Expr::Implicit(Arc::clone(inv), Box::new(simplify(a)))),
        Expr::Integral(q, a) => Poly::atom(Expr::Integral(Arc::clone(q), Box::new(simplify(a)))),
    }
}

fn pow_poly(p: Poly, k: &BigRational) -> Poly {
    if k.is_integer() {
        if let Some(ki) = k.to_integer().to_i64() {
            if let Some(r) = p.powi(ki) {
                return r;
            }
            // Negative power of a sum: keep the sum as an atom.
            if p.as_constant().is_none() {
                let base = Poly::atom(p.to_expr());
                return base.powi(ki).expect("monomial power");
            }
        }
    } else if let Some(c) = p.as_constant() {
        if let Some(r) = c.as_rational() {
            if let Some(v) = exact_power(r, k) {
                return Poly::constant(Number::Rational(v));
            }
        }
    } else if let Some(r) = p.pow_frac(k) {
        return r;
    }
    let base = p.to_expr();
    if let Some(c) = base.as_number() {
        if let Ok(v) = c.pow(k) {
            if !v.is_exact() {
                return Poly::atom(Expr::pow(base, k.clone()));
            }
            return Poly::constant(v);
        }
    }
    Poly::atom(Expr::pow(base, k.clone()))
}

/// `r^k` when the result is rational (including real odd roots of negatives).
fn exact_power(r: &BigRational, k: &BigRational) -> Option<BigRational> {
    let q = k.denom().to_u32()?;
    if r.is_negative() && q % 2 == 0 {
        return None;
    }
    let neg = r.is_negative();
    let a = r.abs();
    let rn = a.numer().nth_root(q);
    let rd = a.denom().nth_root(q);
    if num_traits::pow(rn.clone(), q as usize) != *a.numer() || num_traits::pow(rd.clone(), q as usize) != *a.denom() {
        return None;
    }
    let mut base = BigRational::new(rn, rd);
    if neg {
        base = -base;
    }
    let p = k.numer().to_i32()?;
    if base == BigRational::from_integer(BigInt::from(0)) && p < 0 {
        return None;
    }
    Some(num_traits::Pow::pow(&base, p))
}
