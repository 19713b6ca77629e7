//! Table-driven antiderivatives: sums of monomials in `x`, exponentials,
//! logarithms and powers of affine arguments, and `x^n * exp(a*x + b)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Poly;
use super::{simplify, Expr};
use crate::error::{Error, Result};
use crate::number::Number;

/// An antiderivative of `e` in closed form, or [`Error::NonElementary`].
pub fn antiderivative(e: &Expr) -> Result<Expr> {
    if e.is_inf() || e.is_numeric() {
        return Err(Error::NonElementary(e.to_string()));
    }
    let p = Poly::from_expr(e).ok_or_else(|| Error::NonElementary(e.to_string()))?;
    let mut acc = Expr::int(0);
    for (c, factors) in p.term_list() {
        let t = term(&factors).ok_or_else(|| Error::NonElementary(e.to_string()))?;
        acc = Expr::add(acc, Expr::mul(Expr::Num(c), t));
    }
    Ok(simplify(&acc))
}

fn q(k: &BigRational) -> Expr {
    Expr::rational(k.clone())
}

/// `(slope, intercept)` of an affine argument with a nonzero slope.
fn affine(u: &Expr) -> Option<(Expr, Expr)> {
    let (a, b) = Poly::from_expr(u)?.affine_in_var()?;
    if a.is_zero() {
        return None;
    }
    Some((a.to_expr(), b.to_expr()))
}

fn term(factors: &[(Expr, BigRational)]) -> Option<Expr> {
    let (with, without): (Vec<_>, Vec<_>) = factors.iter().cloned().partition(|(a, _)| a.has_var());
    let constant =
        without.into_iter().map(|(a, k)| if k.is_one() { a } else { Expr::pow(a, k) }).fold(Expr::int(1), Expr::mul);
    let mut x_pow = BigRational::zero();
    let mut others = Vec::new();
    for (a, k) in with {
        if a == Expr::Var {
            x_pow = k;
        } else {
            others.push((a, k));
        }
    }
    let body = match others.as_slice() {
        [] => power_of_x(&x_pow),
        [(a, k)] if x_pow.is_zero() => single(a, k)?,
        [(Expr::Exp(u), k)] if k.is_one() => x_n_exp(&x_pow, u)?,
        [(Expr::Ln(u), k)] if k.is_one() && **u == Expr::Var => x_n_ln(&x_pow),
        _ => return None,
    };
    Some(Expr::mul(constant, body))
}

fn power_of_x(k: &BigRational) -> Expr {
    if *k == -BigRational::one() {
        return Expr::ln(Expr::abs(Expr::Var));
    }
    let k1 = k + BigRational::one();
    Expr::div(Expr::pow(Expr::Var, k1.clone()), q(&k1))
}

/// `u^k` integrated, for affine `u = a*x + b`.
fn affine_power(u: &Expr, k: &BigRational) -> Option<Expr> {
    let (a, _) = affine(u)?;
    if *k == -BigRational::one() {
        return Some(Expr::div(Expr::ln(Expr::abs(u.clone())), a));
    }
    let k1 = k + BigRational::one();
    Some(Expr::div(Expr::pow(u.clone(), k1.clone()), Expr::mul(a, q(&k1))))
}

fn single(atom: &Expr, k: &BigRational) -> Option<Expr> {
    match atom {
        Expr::Exp(u) => {
            let (a, _) = affine(u)?;
            let a = Expr::mul(a, q(k));
            Some(Expr::div(Expr::pow(atom.clone(), k.clone()), a))
        }
        Expr::Ln(u) if k.is_one() => {
            let (a, _) = affine(u)?;
            let u = (**u).clone();
            Some(Expr::div(Expr::sub(Expr::mul(u.clone(), Expr::ln(u.clone())), u), a))
        }
        Expr::Sqrt(u) => affine_power(u, &(k / BigRational::from_integer(2.into()))),
        Expr::Pow(u, j) => affine_power(u, &(j * k)),
        Expr::Abs(_) => None,
        u => affine_power(u, k),
    }
}

/// `x^n * exp(u)` with `u = a*x + b`, by repeated parts.
fn x_n_exp(n: &BigRational, u: &Expr) -> Option<Expr> {
    if !n.is_integer() || n.is_negative() {
        return None;
    }
    let n = n.to_integer().to_u32()?;
    if n > 12 {
        return None;
    }
    let (a, _) = affine(u)?;
    let mut sum = Expr::int(0);
    let mut falling = BigInt::one();
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let coef = Expr::rational(BigRational::from_integer(&falling * sign));
        let t = Expr::div(Expr::mul(coef, Expr::powi(Expr::Var, (n - k) as i64)), Expr::powi(a.clone(), k as i64 + 1));
        sum = Expr::add(sum, t);
        falling *= BigInt::from(n - k);
    }
    Some(Expr::mul(Expr::exp(u.clone()), sum))
}

fn x_n_ln(n: &BigRational) -> Expr {
    let ln = Expr::ln(Expr::Var);
    if *n == -BigRational::one() {
        return Expr::div(Expr::powi(ln, 2), Expr::int(2));
    }
    let n1 = n + BigRational::one();
    let xp = Expr::pow(Expr::Var, n1.clone());
    Expr::sub(Expr::div(Expr::mul(xp.clone(), ln), q(&n1)), Expr::div(xp, Expr::Num(Number::Rational(&n1 * &n1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{differentiate, eval_f64, parse_expr};

    #[test]
    fn derivative_of_antiderivative_is_the_integrand() {
        let corpus = [
            "x",
            "x^3 - 2*x + 1/2",
            "1/x",
            "exp(-2*x + 1)",
            "x*exp(x)",
            "x^2*exp(-x)",
            "ln(x)",
            "x*ln(x)",
            "1/(2*x + 3)",
            "(x + 1)^(1/3)",
            "sqrt(x + 4)",
            "1 - exp(-l*x)",
            "3*(y/4)^(1/3)",
        ];
        let mut p = crate::expr::ParamsF64::new();
        p.insert("l".into(), 1.5);
        p.insert("y".into(), 2.0);
        for src in corpus {
            let e = parse_expr(src).unwrap();
            let f = antiderivative(&e).unwrap_or_else(|err| panic!("{src}: {err}"));
            let df = differentiate(&f).unwrap();
            for &x in &[0.4, 1.3, 2.9] {
                let a = eval_f64(&e, x, &p).unwrap();
                let b = eval_f64(&df, x, &p).unwrap();
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{src} -> {f}: {a} vs {b} at {x}");
            }
        }
    }

    #[test]
    fn standard_forms() {
        let s = |src: &str| antiderivative(&parse_expr(src).unwrap()).unwrap().to_string();
        assert_eq!(s("x"), "x^2/2");
        assert_eq!(s("exp(x)"), "exp(x)");
        assert_eq!(s("1/x"), "ln(abs(x))");
    }

    #[test]
    fn non_elementary_is_reported() {
        let e = parse_expr("exp(-x^2)").unwrap();
        assert!(matches!(antiderivative(&e), Err(Error::NonElementary(_))));
    }
}
