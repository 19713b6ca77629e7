//! Penalty functions whose proximity operator extends a given monotone map.

use crate::conv::{conjugate, domain_point, integ};
use crate::env::AssumptionEnv;
use crate::error::Result;
use crate::expr::{Bound, Expr, ParamsF64};
use crate::monop::{invert, maximal_extension, subdifferential, MonotoneOperator};
use crate::number::Number;
use crate::oracle::graph_points;
use crate::piece::tail_limit;
use crate::pwf::{parse_pwf_raw, PiecewiseFunction};

/// `f` with `gph T` inside `gph prox_f`: `f = h* - y^2/2` where
/// `dh` is a maximal extension of `T`.
///
/// `f` is only weakly convex. The additive constant is chosen so that `f`
/// vanishes at infinity when it has a finite limit there.
pub fn recover_penalty(t: &MonotoneOperator) -> Result<PiecewiseFunction> {
    let te = maximal_extension(t)?;
    let anchor = domain_point(&te)?;
    let h = integ(&te, &anchor, &Expr::int(0))?;
    let hs = conjugate(&h)?;
    let mut f = hs.add_quadratic(&Number::int(-1));
    f.weakly_convex = true;
    let ends = [(f.pieces.len() - 1, Bound::PosInf), (0, Bound::NegInf)];
    for (i, end) in ends {
        if !f.pieces[i].is_finite() {
            continue;
        }
        if let Ok(Bound::Finite(c)) = tail_limit(&f.pieces[i].body, &end, &f.env) {
            if !c.is_zero() {
                f = f.shift(&Expr::neg(c));
            }
            break;
        }
    }
    f.validated()
}

/// Parse a penalty, requiring only that `f + var^2/2` is convex.
pub fn parse_penalty_in(text: &str, var: &str, env: &AssumptionEnv) -> Result<PiecewiseFunction> {
    let mut f = parse_pwf_raw(text, var, env)?;
    f.weakly_convex = true;
    f.validated()
}

#[derive(Clone, Debug)]
pub struct PenaltyReport {
    pub pass: bool,
    pub max_violation: f64,
    /// The worst graph point of `T`.
    pub witness: Option<(f64, f64)>,
    pub points: usize,
}

/// Tolerance on membership in the graph of the prox.
pub const PENALTY_TOL: f64 = 1e-9;

/// Sample about 500 graph points of `T` and measure their distance to the
/// graph of `prox_f`.
pub fn verify_penalty(t: &MonotoneOperator, f: &PiecewiseFunction, params: &ParamsF64) -> Result<PenaltyReport> {
    // prox_f = (d(f + y^2/2))^{-1}, valid whenever f + y^2/2 is convex.
    let mut g = f.add_quadratic(&Number::one());
    g.weakly_convex = false;
    let p = invert(&subdifferential(&g)?)?;
    let per_piece = 500usize.div_ceil(t.pieces.len());
    let pts = graph_points(t, per_piece, params)?;
    let mut rep = PenaltyReport { pass: true, max_violation: 0.0, witness: None, points: pts.len() };
    for (x, u) in pts {
        let v = match p.eval_f64(x, params)? {
            Some((lo, hi)) => (lo - u).max(u - hi).max(0.0),
            None => f64::INFINITY,
        };
        if v > rep.max_violation || (v.is_nan() && rep.witness.is_none()) {
            rep.max_violation = v;
            rep.witness = Some((x, u));
        }
    }
    rep.pass = rep.max_violation < PENALTY_TOL;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_env;
    use crate::env::AssumptionEnv;
    use crate::expr::params_f64;
    use crate::monop::{parse_op, prox};
    use crate::pwf::parse_pwf;

    const H1: &str = "sd{ x < -1 -> {x} ; x = -1 -> {0, x} ; -1 < x & x < 1 -> {0} ; x = 1 -> {0, x} ; x > 1 -> {x} }";

    fn w() -> ParamsF64 {
        params_f64(&Default::default())
    }

    #[test]
    fn hard_threshold_penalty() {
        let t = parse_op(H1, &AssumptionEnv::empty()).unwrap();
        let f = recover_penalty(&t).unwrap();
        assert!(f.weakly_convex);
        for k in 0..=400 {
            let y = -4.0 + 8.0 * k as f64 / 400.0;
            let want = if y.abs() > 1.0 { 0.0 } else { -0.5 * (1.0 - y.abs()).powi(2) };
            assert!((f.eval_f64(y, &w()).unwrap() - want).abs() < 1e-12, "y={y}");
        }
        let rep = verify_penalty(&t, &f, &w()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.points >= 500);
    }

    #[test]
    fn symbolic_threshold_penalty() {
        let env = parse_env(&["0 < alpha"]).unwrap();
        let t = parse_op(&H1.replace("1", "alpha"), &env).unwrap();
        let f = recover_penalty(&t).unwrap();
        let bind = crate::expr::Params::from([("alpha".to_string(), crate::expr::rat(3, 2))]);
        let g = f.bind(&bind);
        for y in [-3.0f64, -1.5, -1.0, 0.0, 0.4, 1.49, 2.0] {
            let want = if y.abs() > 1.5 { 0.0 } else { -0.5 * (1.5 - y.abs()).powi(2) };
            assert!((g.eval_f64(y, &w()).unwrap() - want).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn identity_has_zero_penalty() {
        let env = AssumptionEnv::empty();
        let t = MonotoneOperator::identity("x", &env);
        let f = recover_penalty(&t).unwrap();
        assert_eq!(f.pieces.len(), 1);
        assert!(f.pieces[0].body.is_zero());
        assert!(verify_penalty(&t, &f, &w()).unwrap().pass);
    }

    #[test]
    fn projection_recovers_indicator() {
        let env = AssumptionEnv::empty();
        let box_ = parse_pwf("pw{ x < -1 -> inf ; -1 <= x & x <= 2 -> 0 ; x > 2 -> inf }", &env).unwrap();
        let t = prox(&box_, &Expr::int(1)).unwrap();
        let f = recover_penalty(&t).unwrap();
        for y in [-1.0, 0.0, 1.5, 2.0] {
            assert!(f.eval_f64(y, &w()).unwrap().abs() < 1e-12);
        }
        assert_eq!(f.eval_f64(2.5, &w()).unwrap(), f64::INFINITY);
        assert!(verify_penalty(&t, &f, &w()).unwrap().pass);
    }

    #[test]
    fn wrong_penalty_fails_with_witness() {
        let env = AssumptionEnv::empty();
        let t = parse_op(H1, &env).unwrap();
        let zero = parse_pwf("0", &env).unwrap();
        let rep = verify_penalty(&t, &zero, &w()).unwrap();
        assert!(!rep.pass);
        let (x, u) = rep.witness.unwrap();
        assert!(x.abs() <= 1.0 && (x - u).abs() > 0.5);
    }

    #[test]
    fn weakly_convex_parsing() {
        let env = AssumptionEnv::empty();
        let f = parse_penalty_in("-y^2/4", "y", &env).unwrap();
        assert_eq!(f.pieces[0].kind, crate::pwf::PieceKind::StrictlyConvex);
        assert!(parse_penalty_in("-y^2", "y", &env).is_err());
        assert!(parse_pwf("-x^2/4", &env).is_err());
    }
}
