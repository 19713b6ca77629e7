use num_traits::One;

use super::{simplify, Expr};
use crate::error::{Error, Result};

/// Symbolic derivative with respect to the variable, simplified.
///
/// `abs` is rejected (piecewise splitting removes it first), except inside
/// `ln(abs(u))`, the antiderivative of `1/u`.
pub fn differentiate(e: &Expr) -> Result<Expr> {
    Ok(simplify(&d(e)?))
}

fn d(e: &Expr) -> Result<Expr> {
    if e.is_inf() {
        return Err(Error::Domain("derivative of the infinite body".into()));
    }
    if !e.has_var() {
        return Ok(Expr::int(0));
    }
    Ok(match e {
        Expr::Var => Expr::int(1),
        Expr::Neg(a) => Expr::neg(d(a)?),
        Expr::Add(a, b) => Expr::add(d(a)?, d(b)?),
        Expr::Sub(a, b) => Expr::sub(d(a)?, d(b)?),
        Expr::Mul(a, b) => Expr::add(Expr::mul(d(a)?, (**b).clone()), Expr::mul((**a).clone(), d(b)?)),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(Expr::mul(d(a)?, (**b).clone()), Expr::mul((**a).clone(), d(b)?)),
            Expr::powi((**b).clone(), 2),
        ),
        Expr::Pow(a, k) => Expr::mul(
            Expr::mul(Expr::rational(k.clone()), Expr::pow((**a).clone(), k - num_rational::BigRational::one())),
            d(a)?,
        ),
        Expr::Exp(a) => Expr::mul(e.clone(), d(a)?),
        Expr::Ln(a) => match &**a {
            Expr::Abs(u) => Expr::div(d(u)?, (**u).clone()),
            u => Expr::div(d(u)?, u.clone()),
        },
        Expr::Sqrt(a) => Expr::div(d(a)?, Expr::mul(Expr::int(2), e.clone())),
        Expr::Abs(_) => return Err(Error::Unsupported(format!("derivative of abs in {e}"))),
        Expr::Implicit(inv, a) => {
            let g1 = differentiate(&inv.forward)?;
            Expr::div(d(a)?, g1.subst_var(e))
        }
        Expr::Integral(q, a) => Expr::mul(q.integrand.subst_var(a), d(a)?),
        Expr::Num(_) | Expr::Param(_) | Expr::Inf => unreachable!("constant handled above"),
    })
}
