//! Superexpectations, superquantiles and CVaR of a real random variable.

use crate::conv::{conjugate, domain_point, integ};
use crate::env::{AssumptionEnv, Cmp};
use crate::error::{Error, Result};
use crate::expr::{compare_exprs, parse_expr_in, simplify, Bound, Expr, Params};
use crate::monop::{eval_op, invert, op_kind, subdifferential, MonotoneOperator, OpPiece, SetValue};
use crate::number::{ExtReal, Number};
use crate::piece::{side_limit, tail_limit, Side};
use crate::pwf::{parse_pwf_raw, PiecewiseFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    /// Distribution function in `x`, as a piecewise expression.
    Cdf(PiecewiseFunction),
    /// Quantile function in `p` on `(0, 1)`.
    Quantile(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec {
    pub dist: Distribution,
    pub env: AssumptionEnv,
}

fn invalid(e: Error) -> Error {
    match e {
        Error::NotMonotone(m) => Error::InvalidDistribution(format!("decreasing: {m}")),
        other => other,
    }
}

impl DistributionSpec {
    pub fn cdf(text: &str, env: &AssumptionEnv) -> Result<DistributionSpec> {
        let f = parse_pwf_raw(text, "x", env)?;
        let d = DistributionSpec { dist: Distribution::Cdf(f), env: env.clone() };
        d.operator()?;
        Ok(d)
    }

    pub fn quantile(text: &str, env: &AssumptionEnv) -> Result<DistributionSpec> {
        let q = simplify(&parse_expr_in(text, "p")?);
        let d = DistributionSpec { dist: Distribution::Quantile(q), env: env.clone() };
        d.operator()?;
        Ok(d)
    }

    /// The distribution function with its jumps filled in, as a maximal
    /// monotone operator in `x`.
    pub fn operator(&self) -> Result<MonotoneOperator> {
        let env = &self.env;
        let t = match &self.dist {
            Distribution::Cdf(f) => cdf_operator(f)?,
            Distribution::Quantile(q) => {
                let (zero, one) = (Bound::int(0), Bound::int(1));
                let kind = op_kind(q, &zero, &one, env).map_err(invalid)?;
                let at0 = side_limit(q, &Expr::int(0), Side::Right, env)?;
                let at1 = side_limit(q, &Expr::int(1), Side::Left, env)?;
                let qt = MonotoneOperator {
                    var: "p".into(),
                    breakpoints: vec![Expr::int(0), Expr::int(1)],
                    pieces: vec![OpPiece::Empty, OpPiece::Single { body: q.clone(), kind }, OpPiece::Empty],
                    values: vec![
                        SetValue::interval(Bound::NegInf, at0, env)?,
                        SetValue::interval(at1, Bound::PosInf, env)?,
                    ],
                    env: env.clone(),
                    numeric: false,
                };
                let mut t = invert(&qt)?;
                t.var = "x".into();
                t
            }
        };
        t.check().map_err(invalid)?;
        Ok(t)
    }
}

fn cdf_operator(f: &PiecewiseFunction) -> Result<MonotoneOperator> {
    let env = &f.env;
    if f.pieces.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidDistribution("infinite value".into()));
    }
    let tails = [(&f.pieces[0].body, Bound::NegInf, 0), (&f.pieces[f.pieces.len() - 1].body, Bound::PosInf, 1)];
    for (body, end, want) in tails {
        let ok = matches!(tail_limit(body, &end, env)?, Bound::Finite(ref v) if compare_exprs(v, &Expr::int(want), env)? == Cmp::Equal);
        if !ok {
            return Err(Error::InvalidDistribution(format!("limit at {} is not {want}", end.text())));
        }
    }
    let mut pieces = Vec::with_capacity(f.pieces.len());
    for (i, p) in f.pieces.iter().enumerate() {
        let (lo, hi) = f.interval(i);
        let body = p.body.clone();
        pieces.push(OpPiece::Single { kind: op_kind(&body, &lo, &hi, env).map_err(invalid)?, body });
    }
    let mut values = Vec::with_capacity(f.breakpoints.len());
    for (i, b) in f.breakpoints.iter().enumerate() {
        let left = side_limit(&f.pieces[i].body, b, Side::Left, env)?;
        let right = side_limit(&f.pieces[i + 1].body, b, Side::Right, env)?;
        let at_right = matches!(&right, Bound::Finite(r) if compare_exprs(r, &f.values[i], env)? == Cmp::Equal);
        if !at_right {
            return Err(Error::InvalidDistribution(format!("not right-continuous at {b}")));
        }
        values.push(SetValue::interval(left, right, env).map_err(invalid)?);
    }
    Ok(MonotoneOperator {
        var: f.var.clone(),
        breakpoints: f.breakpoints.clone(),
        pieces,
        values,
        env: env.clone(),
        numeric: false,
    })
}

/// `x -> E[max(x, X)]`, pinned by `E(x) - x -> 0` at `+inf`.
pub fn superexpectation(d: &DistributionSpec) -> Result<PiecewiseFunction> {
    let ft = d.operator()?;
    let e0 = integ(&ft, &domain_point(&ft)?, &Expr::int(0))?;
    let env = &e0.env;
    let last = &e0.pieces[e0.pieces.len() - 1].body;
    let gap = simplify(&Expr::sub(last.clone(), Expr::Var));
    let c = match tail_limit(&gap, &Bound::PosInf, env) {
        Ok(Bound::Finite(c)) => c,
        Ok(_) => return Err(Error::NoFirstMoment),
        Err(e) => return Err(Error::UnsupportedTail(e.to_string())),
    };
    let e = e0.shift(&Expr::neg(c));
    // E tends to the mean at -inf.
    match tail_limit(&e.pieces[0].body, &Bound::NegInf, env) {
        Ok(Bound::Finite(_)) => Ok(e),
        Ok(_) => Err(Error::NoFirstMoment),
        Err(err) => Err(Error::UnsupportedTail(err.to_string())),
    }
}

/// The subdifferential of the superexpectation.
pub fn superdistribution(d: &DistributionSpec) -> Result<MonotoneOperator> {
    subdifferential(&superexpectation(d)?)
}

/// Conjugate of the superexpectation, in the variable `p`.
pub fn superexpectation_conjugate(d: &DistributionSpec) -> Result<PiecewiseFunction> {
    let mut c = conjugate(&superexpectation(d)?)?;
    c.var = "p".into();
    Ok(c)
}

fn check_level(p: &Number) -> Result<()> {
    if p.signum().is_le() || p.cmp_num(&Number::one()).is_ge() {
        return Err(Error::POutOfRange(p.to_string()));
    }
    Ok(())
}

fn finite(v: ExtReal) -> Result<Number> {
    match v {
        ExtReal::Finite(n) => Ok(n),
        other => Err(Error::Internal(format!("unexpected infinite value {}", other.to_f64()))),
    }
}

/// Lower end of the inverse superdistribution at `p`.
pub fn quantile(d: &DistributionSpec, p: &Number, params: &Params) -> Result<ExtReal> {
    check_level(p)?;
    let q = invert(&superdistribution(d)?)?;
    match eval_op(&q, &ExtReal::Finite(p.clone()), params)?.bounds() {
        Some((lo, _)) => lo.eval(params),
        None => Err(Error::Internal(format!("quantile undefined at {p}"))),
    }
}

/// Average of the quantiles above `p`, computed as
/// `(E*(1) - E*(p)) / (1 - p)`.
pub fn superquantile(d: &DistributionSpec, p: &Number, params: &Params) -> Result<ExtReal> {
    check_level(p)?;
    let es = superexpectation_conjugate(d)?;
    let at_p = finite(es.eval(&ExtReal::Finite(p.clone()), params)?)?;
    let at_1 = finite(es.eval(&ExtReal::Finite(Number::one()), params)?)?;
    Ok(ExtReal::Finite(at_1.sub(&at_p).div(&Number::one().sub(p))?))
}

/// Conditional value-at-risk; the same as [`superquantile`].
pub fn cvar(d: &DistributionSpec, p: &Number, params: &Params) -> Result<ExtReal> {
    superquantile(d, p, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_env;
    use crate::expr::{params_f64, rat};

    const EXPO: &str = "pw{ x < 0 -> 0 ; x >= 0 -> 1 - exp(-x) }";
    const UNIFORM: &str = "pw{ x < 0 -> 0 ; 0 <= x & x < 1 -> x ; x >= 1 -> 1 }";
    const POINT: &str = "pw{ x < 0 -> 0 ; x >= 0 -> 1 }";

    fn cdf(t: &str) -> DistributionSpec {
        DistributionSpec::cdf(t, &AssumptionEnv::empty()).unwrap()
    }

    fn num(v: f64) -> Number {
        Number::Decimal(v)
    }

    fn none() -> Params {
        Params::new()
    }

    #[test]
    fn exponential_superexpectation() {
        let e = superexpectation(&cdf(EXPO)).unwrap();
        let w = params_f64(&none());
        for x in [-3.0f64, -0.5, 0.0, 0.3, 1.0, 7.5] {
            let want = if x <= 0.0 { 1.0 } else { x + (-x).exp() };
            assert!((e.eval_f64(x, &w).unwrap() - want).abs() < 1e-12);
        }
        e.validate().unwrap();
    }

    #[test]
    fn symbolic_rate() {
        let env = parse_env(&["0 < lambda"]).unwrap();
        let d = DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 - exp(-lambda*x) }", &env).unwrap();
        let e = superexpectation(&d).unwrap();
        let p = Params::from([("lambda".to_string(), rat(2, 1))]);
        let w = params_f64(&p);
        assert!((e.eval_f64(-1.0, &w).unwrap() - 0.5).abs() < 1e-12);
        assert!((e.eval_f64(1.0, &w).unwrap() - (2.0 + (-2f64).exp()) / 2.0).abs() < 1e-12);
        let s = superquantile(&d, &Number::ratio(1, 2), &p).unwrap().to_f64();
        assert!((s - (1.0 - 0.5f64.ln()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_point_values() {
        let d = cdf(EXPO);
        let sd = superdistribution(&d).unwrap();
        let w = params_f64(&none());
        let (a, b) = sd.eval_f64(1.0, &w).unwrap().unwrap();
        assert!((a - (1.0 - (-1f64).exp())).abs() < 1e-15 && a == b);
        assert_eq!(sd.eval_f64(-1.0, &w).unwrap(), Some((0.0, 0.0)));
        let half = Number::ratio(1, 2);
        let sq = superquantile(&d, &half, &none()).unwrap().to_f64();
        assert!((sq - (1.0 - 0.5f64.ln())).abs() < 1e-12);
        let ce = superexpectation_conjugate(&d).unwrap();
        let at = ce.eval(&ExtReal::Finite(half), &none()).unwrap().to_f64();
        assert!((at + 0.846574).abs() < 1e-6);
        // sup of x/2 - x - exp(-x) is attained at ln 2.
        assert!((at - (-0.5 * 2f64.ln() - 0.5)).abs() < 1e-12);
        let q = quantile(&d, &num(1.0 - (-1f64).exp()), &none()).unwrap().to_f64();
        assert!((q - 1.0).abs() < 1e-10);
        let c = cvar(&d, &Number::ratio(19, 20), &none()).unwrap().to_f64();
        assert!((c - (1.0 + 20f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn uniform_values() {
        let d = cdf(UNIFORM);
        let e = superexpectation(&d).unwrap();
        assert_eq!(
            e.eval(&ExtReal::Finite(Number::ratio(1, 2)), &none()).unwrap(),
            ExtReal::Finite(Number::ratio(5, 8))
        );
        assert_eq!(superquantile(&d, &Number::ratio(1, 2), &none()).unwrap(), ExtReal::Finite(Number::ratio(3, 4)));
        assert_eq!(cvar(&d, &Number::ratio(9, 10), &none()).unwrap(), ExtReal::Finite(Number::ratio(19, 20)));
        assert_eq!(quantile(&d, &Number::ratio(1, 4), &none()).unwrap(), ExtReal::Finite(Number::ratio(1, 4)));
        // Tail average by the midpoint rule.
        let p = 0.3;
        let n = 100_000;
        let avg: f64 = (0..n).map(|k| p + (1.0 - p) * (k as f64 + 0.5) / n as f64).sum::<f64>() / n as f64;
        let sq = superquantile(&d, &num(p), &none()).unwrap().to_f64();
        assert!((sq - avg).abs() < 1e-9);
    }

    #[test]
    fn point_mass() {
        let d = cdf(POINT);
        let e = superexpectation(&d).unwrap();
        let w = params_f64(&none());
        for x in [-2.0, 0.0, 3.0] {
            assert_eq!(e.eval_f64(x, &w).unwrap(), f64::max(x, 0.0));
        }
        let sd = superdistribution(&d).unwrap();
        assert_eq!(sd.eval_f64(0.0, &w).unwrap(), Some((0.0, 1.0)));
        for p in [Number::ratio(1, 100), Number::ratio(1, 2), Number::ratio(99, 100)] {
            assert_eq!(quantile(&d, &p, &none()).unwrap(), ExtReal::Finite(Number::zero()));
        }
    }

    #[test]
    fn quantile_input_matches_cdf_input() {
        let d = DistributionSpec::quantile("-ln(1 - p)", &AssumptionEnv::empty()).unwrap();
        let e = superexpectation(&d).unwrap();
        let w = params_f64(&none());
        for x in [-1.0f64, 0.0, 2.0] {
            let want = if x <= 0.0 { 1.0 } else { x + (-x).exp() };
            assert!((e.eval_f64(x, &w).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let env = AssumptionEnv::empty();
        let pareto = DistributionSpec::cdf("pw{ x < 1 -> 0 ; x >= 1 -> 1 - 1/x }", &env).unwrap();
        assert_eq!(superexpectation(&pareto), Err(Error::NoFirstMoment));
        assert!(matches!(
            DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1/2 }", &env),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            DistributionSpec::cdf("pw{ x < 0 -> 0 ; 0 <= x & x < 1 -> 1 - x/2 ; x >= 1 -> 1 }", &env),
            Err(Error::InvalidDistribution(_))
        ));
        let d = cdf(UNIFORM);
        assert!(matches!(cvar(&d, &Number::one(), &none()), Err(Error::POutOfRange(_))));
        assert!(matches!(quantile(&d, &Number::zero(), &none()), Err(Error::POutOfRange(_))));
    }
}
