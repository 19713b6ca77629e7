use std::collections::BTreeMap;

use num_rational::BigRational;

use super::{limit, simplify, Approach, Bound, Expr};
use crate::env::AssumptionEnv;
use crate::error::{Error, Result};
use crate::number::{rational_to_f64, ExtReal, Number};

/// Parameter bindings.
pub type Params = BTreeMap<String, BigRational>;
/// Parameter bindings for the floating-point fast path.
pub type ParamsF64 = BTreeMap<String, f64>;

/// Evaluate at a point of the extended line. At `±inf` the value is the
/// limit of the expression.
pub fn eval(e: &Expr, x: &ExtReal, params: &Params) -> Result<ExtReal> {
    match x {
        ExtReal::Finite(n) => {
            if e.is_inf() {
                return Ok(ExtReal::PosInf);
            }
            let v = eval_number(e, n, params)?;
            Ok(match v {
                Number::Decimal(d) if d.is_infinite() => ExtReal::from_f64(d),
                v => ExtReal::Finite(v),
            })
        }
        inf => {
            check_bound(e, params)?;
            let bound = simplify(&e.subst_params(params));
            let approach = if matches!(inf, ExtReal::PosInf) { Approach::PosInf } else { Approach::NegInf };
            match limit(&bound, &approach, &AssumptionEnv::empty())? {
                Bound::NegInf => Ok(ExtReal::NegInf),
                Bound::PosInf => Ok(ExtReal::PosInf),
                Bound::Finite(v) => eval(&v, &ExtReal::Finite(Number::zero()), params),
            }
        }
    }
}

fn check_bound(e: &Expr, params: &Params) -> Result<()> {
    for p in e.params() {
        if !params.contains_key(&p) {
            return Err(Error::UnboundParameter(p));
        }
    }
    Ok(())
}

/// Exact where the operations allow it, decimal otherwise.
pub fn eval_number(e: &Expr, x: &Number, params: &Params) -> Result<Number> {
    let ev = |a: &Expr| eval_number(a, x, params);
    let out = match e {
        Expr::Num(n) => n.clone(),
        Expr::Var => x.clone(),
        Expr::Param(p) => Number::Rational(params.get(p).cloned().ok_or_else(|| Error::UnboundParameter(p.clone()))?),
        Expr::Neg(a) => ev(a)?.neg(),
        Expr::Abs(a) => ev(a)?.abs(),
        Expr::Add(a, b) => ev(a)?.add(&ev(b)?),
        Expr::Sub(a, b) => ev(a)?.sub(&ev(b)?),
        Expr::Mul(a, b) => ev(a)?.mul(&ev(b)?),
        Expr::Div(a, b) => ev(a)?.div(&ev(b)?)?,
        Expr::Pow(a, k) => ev(a)?.pow(k)?,
        Expr::Exp(a) => {
            let v = ev(a)?;
            if v.is_exact() && v.is_zero() {
                Number::one()
            } else {
                Number::Decimal(v.to_f64().exp())
            }
        }
        Expr::Ln(a) => {
            let v = ev(a)?;
            if v.signum() != std::cmp::Ordering::Greater {
                return Err(Error::Domain(format!("ln of nonpositive value {v}")));
            }
            if v.is_exact() && v.is_one() {
                Number::zero()
            } else {
                Number::Decimal(v.to_f64().ln())
            }
        }
        Expr::Sqrt(a) => {
            let v = ev(a)?;
            if v.is_negative() {
                return Err(Error::Domain(format!("sqrt of negative value {v}")));
            }
            exact_sqrt(&v).unwrap_or_else(|| Number::Decimal(v.to_f64().sqrt()))
        }
        Expr::Inf => return Err(Error::Domain("inf used inside arithmetic".into())),
        Expr::Implicit(..) | Expr::Integral(..) => {
            let pf = params_f64(params);
            Number::Decimal(eval_f64(e, x.to_f64(), &pf)?)
        }
    };
    if let Number::Decimal(d) = out {
        if d.is_nan() {
            return Err(Error::Domain("undefined value".into()));
        }
    }
    Ok(out)
}

fn exact_sqrt(v: &Number) -> Option<Number> {
    let r = v.as_rational()?;
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Number::Rational(BigRational::new(n, d)))
    } else {
        None
    }
}

pub fn params_f64(params: &Params) -> ParamsF64 {
    params.iter().map(|(k, v)| (k.clone(), rational_to_f64(v))).collect()
}

/// Floating-point evaluation used by samplers and numeric nodes.
pub fn eval_f64(e: &Expr, x: f64, params: &ParamsF64) -> Result<f64> {
    let ev = |a: &Expr| eval_f64(a, x, params);
    let v = match e {
        Expr::Num(n) => n.to_f64(),
        Expr::Var => x,
        Expr::Param(p) => *params.get(p).ok_or_else(|| Error::UnboundParameter(p.clone()))?,
        Expr::Neg(a) => -ev(a)?,
        Expr::Abs(a) => ev(a)?.abs(),
        Expr::Add(a, b) => ev(a)? + ev(b)?,
        Expr::Sub(a, b) => ev(a)? - ev(b)?,
        Expr::Mul(a, b) => ev(a)? * ev(b)?,
        Expr::Div(a, b) => {
            let d = ev(b)?;
            if d == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            ev(a)? / d
        }
        Expr::Pow(a, k) => Number::Decimal(ev(a)?).pow(k)?.to_f64(),
        Expr::Exp(a) => ev(a)?.exp(),
        Expr::Ln(a) => {
            let v = ev(a)?;
            if v <= 0.0 {
                return Err(Error::Domain(format!("ln of nonpositive value {v}")));
            }
            v.ln()
        }
        Expr::Sqrt(a) => {
            let v = ev(a)?;
            if v < 0.0 {
                return Err(Error::Domain(format!("sqrt of negative value {v}")));
            }
            v.sqrt()
        }
        Expr::Inf => f64::INFINITY,
        Expr::Implicit(inv, a) => inv.solve(ev(a)?, params)?,
        Expr::Integral(q, a) => q.eval(ev(a)?, params)?,
    };
    if v.is_nan() {
        return Err(Error::Domain("undefined value".into()));
    }
    Ok(v)
}
