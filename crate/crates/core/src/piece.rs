//! Helpers shared by functions and operators: breakpoint ordering, one-sided
//! values, sampling, and abs elimination.

use std::cmp::Ordering;

use crate::env::{AssumptionEnv, Cmp};
use crate::error::{Error, Result};
use crate::expr::{
    chebyshev_nodes, compare_exprs, differentiate, eval_f64, limit, params_f64, simplify, Approach, Bound, Expr,
    ParamsF64,
};

/// Sample count per piece for the kind and monotonicity guards.
pub(crate) const SAMPLES: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

/// Where a point sits relative to a breakpoint list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    /// Exactly at breakpoint `i`.
    At(usize),
    /// Inside open interval `i` (interval 0 is left of every breakpoint).
    In(usize),
}

/// Floating-point values of every parameter in sight, chosen to satisfy the
/// assumptions.
pub(crate) fn witness<'a>(env: &AssumptionEnv, exprs: impl IntoIterator<Item = &'a Expr>) -> ParamsF64 {
    let mut names: Vec<String> = Vec::new();
    for e in exprs {
        for p in e.params() {
            if !names.contains(&p) {
                names.push(p);
            }
        }
    }
    params_f64(&env.witness(&names))
}

/// Order two finite breakpoints, failing when the assumptions do not decide.
pub(crate) fn order(a: &Expr, b: &Expr, env: &AssumptionEnv) -> Result<Ordering> {
    match compare_exprs(a, b, env)? {
        Cmp::Less => Ok(Ordering::Less),
        Cmp::Equal => Ok(Ordering::Equal),
        Cmp::Greater => Ok(Ordering::Greater),
        Cmp::Undecidable => Err(Error::UndecidableComparison(a.to_string(), b.to_string())),
    }
}

/// Locate `x` among increasing breakpoints.
pub(crate) fn locate(bps: &[Expr], x: &Expr, env: &AssumptionEnv) -> Result<Loc> {
    for (i, b) in bps.iter().enumerate() {
        match order(x, b, env)? {
            Ordering::Less => return Ok(Loc::In(i)),
            Ordering::Equal => return Ok(Loc::At(i)),
            Ordering::Greater => {}
        }
    }
    Ok(Loc::In(bps.len()))
}

/// Locate a float among evaluated breakpoints.
pub(crate) fn locate_f64(bps: &[f64], x: f64) -> Loc {
    for (i, &b) in bps.iter().enumerate() {
        if x < b {
            return Loc::In(i);
        }
        if x == b {
            return Loc::At(i);
        }
    }
    Loc::In(bps.len())
}

/// Sort and deduplicate under the assumptions.
pub(crate) fn sort_unique(mut v: Vec<Expr>, env: &AssumptionEnv) -> Result<Vec<Expr>> {
    let mut out: Vec<Expr> = Vec::with_capacity(v.len());
    for e in v.drain(..) {
        let mut pos = out.len();
        let mut dup = false;
        for (i, o) in out.iter().enumerate() {
            match order(&e, o, env)? {
                Ordering::Less => {
                    pos = i;
                    break;
                }
                Ordering::Equal => {
                    dup = true;
                    break;
                }
                Ordering::Greater => {}
            }
        }
        if !dup {
            out.insert(pos, e);
        }
    }
    Ok(out)
}

/// End points of interval `i` for a breakpoint list.
pub(crate) fn interval_of(bps: &[Expr], i: usize) -> (Bound, Bound) {
    let lo = if i == 0 { Bound::NegInf } else { Bound::Finite(bps[i - 1].clone()) };
    let hi = if i == bps.len() { Bound::PosInf } else { Bound::Finite(bps[i].clone()) };
    (lo, hi)
}

/// One-sided limit of `body` at the finite point `b`. Bodies continuous at
/// `b` are evaluated by substitution; anything else goes to the limit engine.
pub(crate) fn side_limit(body: &Expr, b: &Expr, side: Side, env: &AssumptionEnv) -> Result<Bound> {
    if body.is_inf() {
        return Ok(Bound::PosInf);
    }
    if !body.has_var() {
        return Ok(Bound::Finite(simplify(body)));
    }
    let s = simplify(&body.subst_var(b));
    let w = witness(env, [&s, body]);
    let bf = eval_f64(b, 0.0, &w).unwrap_or(f64::NAN);
    let direct = eval_f64(&s, 0.0, &w);
    // A value at `b` alone is not enough: the body must also be defined just
    // beside it on the requested side.
    let h = 1e-7 * (1.0 + bf.abs());
    let near = eval_f64(body, if side == Side::Left { bf - h } else { bf + h }, &w);
    if let (Ok(v), Ok(n)) = (direct, near) {
        if v.is_finite() && n.is_finite() && (v - n).abs() < 1e-3 * (1.0 + v.abs()) {
            return Ok(Bound::Finite(s));
        }
    }
    let at = match side {
        Side::Left => Approach::Left(b.clone()),
        Side::Right => Approach::Right(b.clone()),
    };
    limit(body, &at, env)
}

/// Limit of `body` at an end of the line.
pub(crate) fn tail_limit(body: &Expr, at: &Bound, env: &AssumptionEnv) -> Result<Bound> {
    if body.is_inf() {
        return Ok(Bound::PosInf);
    }
    let approach = match at {
        Bound::PosInf => Approach::PosInf,
        Bound::NegInf => Approach::NegInf,
        Bound::Finite(_) => return Err(Error::Internal("tail limit at a finite point".into())),
    };
    limit(body, &approach, env)
}

/// Limit of `body` towards an end of the interval (`lo` from the right or
/// `hi` from the left).
pub(crate) fn end_limit(body: &Expr, end: &Bound, side: Side, env: &AssumptionEnv) -> Result<Bound> {
    match end {
        Bound::Finite(b) => side_limit(body, b, side, env),
        inf => tail_limit(body, inf, env),
    }
}

/// Sample points strictly inside `(lo, hi)` at the witness parameters: two
/// Chebyshev sets, one wide and one near the origin.
pub(crate) fn sample_points(lo: &Bound, hi: &Bound, w: &ParamsF64, n: usize) -> Result<Vec<f64>> {
    let a = lo.eval_f64(w)?;
    let b = hi.eval_f64(w)?;
    let mut pts = chebyshev_nodes(a, b, 10.0, n);
    if !a.is_finite() || !b.is_finite() {
        pts.extend(chebyshev_nodes(a, b, 1e3, n));
        pts.sort_by(f64::total_cmp);
    }
    Ok(pts)
}

/// Monotonicity class of a sampled function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Trend {
    Constant,
    Increasing,
}

/// Classify `g` on `(lo, hi)` by sampling: constant when it has no variable,
/// strictly increasing when every sampled step rises, otherwise an error
/// carrying the first decreasing pair.
pub(crate) fn trend(g: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> std::result::Result<Trend, (f64, f64)> {
    if !g.has_var() {
        return Ok(Trend::Constant);
    }
    let w = witness(env, [g]);
    let pts = match sample_points(lo, hi, &w, SAMPLES) {
        Ok(p) => p,
        Err(_) => return Ok(Trend::Increasing),
    };
    let vals: Vec<(f64, f64)> =
        pts.iter().filter_map(|&x| eval_f64(g, x, &w).ok().filter(|v| v.is_finite()).map(|v| (x, v))).collect();
    let mut rises = false;
    for pair in vals.windows(2) {
        let (x0, v0) = pair[0];
        let (x1, v1) = pair[1];
        let tol = 1e-12 * (1.0 + v0.abs().max(v1.abs()));
        if v1 < v0 - tol {
            return Err((x0, x1));
        }
        if v1 > v0 {
            rises = true;
        }
    }
    if !rises && vals.len() > 1 {
        // A variable that cancels numerically: still not strictly monotone.
        return Err((vals[0].0, vals[vals.len() - 1].0));
    }
    Ok(Trend::Increasing)
}

/// Pieces produced by removing `abs` from a body on `(lo, hi)`.
pub(crate) struct AbsSplit {
    /// New interior breakpoints, increasing.
    pub breakpoints: Vec<Expr>,
    /// One body per resulting interval.
    pub bodies: Vec<Expr>,
}

/// Remove every `abs` of an affine argument by splitting at its root.
pub(crate) fn split_abs(body: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> Result<AbsSplit> {
    let Some(target) = body.find_var_abs().cloned() else {
        return Ok(AbsSplit { breakpoints: vec![], bodies: vec![body.clone()] });
    };
    let Expr::Abs(u) = &target else { unreachable!() };
    if u.find_var_abs().is_some() {
        return Err(Error::Unsupported(format!("nested abs in {body}")));
    }
    let (slope, root) = affine_root(u)?;
    let up = simplify(&u.as_ref().clone());
    let down = simplify(&Expr::neg(u.as_ref().clone()));
    let (left, right) = match compare_exprs(&slope, &Expr::int(0), env)? {
        Cmp::Greater => (down, up),
        Cmp::Less => (up, down),
        Cmp::Equal => unreachable!("affine_root rejects zero slopes"),
        Cmp::Undecidable => return Err(Error::UndecidableComparison(slope.to_string(), "0".into())),
    };
    let r = Bound::Finite(root.clone());
    let inside_lo = r.cmp_strict(lo, env)? == Ordering::Greater;
    let inside_hi = r.cmp_strict(hi, env)? == Ordering::Less;
    if !inside_lo {
        return split_abs(&body.replace(&target, &right), lo, hi, env);
    }
    if !inside_hi {
        return split_abs(&body.replace(&target, &left), lo, hi, env);
    }
    let a = split_abs(&body.replace(&target, &left), lo, &r, env)?;
    let b = split_abs(&body.replace(&target, &right), &r, hi, env)?;
    let mut breakpoints = a.breakpoints;
    breakpoints.push(root);
    breakpoints.extend(b.breakpoints);
    let mut bodies = a.bodies;
    bodies.extend(b.bodies);
    Ok(AbsSplit { breakpoints, bodies })
}

/// Slope and root of an expression affine in the variable.
fn affine_root(u: &Expr) -> Result<(Expr, Expr)> {
    let slope = differentiate(u)?;
    if slope.has_var() {
        return Err(Error::Unsupported(format!("abs of the non-affine argument {u}")));
    }
    if slope.is_zero() {
        return Err(Error::Unsupported(format!("abs of {u}")));
    }
    let rest = simplify(&Expr::sub(u.clone(), Expr::mul(slope.clone(), Expr::Var)));
    if rest.has_var() {
        return Err(Error::Unsupported(format!("abs of the non-affine argument {u}")));
    }
    let root = simplify(&Expr::div(Expr::neg(rest), slope.clone()));
    Ok((slope, root))
}

/// Replace `abs` by a signed copy of its argument wherever the sign is fixed
/// on `(lo, hi)`; kinks strictly inside are left alone.
pub(crate) fn resolve_abs(body: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> Expr {
    match split_abs(body, lo, hi, env) {
        Ok(s) if s.bodies.len() == 1 => simplify(&s.bodies[0]),
        _ => body.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_env;
    use crate::expr::parse_expr;

    #[test]
    fn abs_splits_at_parameter_root() {
        let env = parse_env(&["0 < a"]).unwrap();
        let s = split_abs(&parse_expr("abs(x - a) + 1").unwrap(), &Bound::NegInf, &Bound::PosInf, &env).unwrap();
        assert_eq!(s.breakpoints, vec![Expr::param("a")]);
        assert_eq!(s.bodies[0].to_string(), "-x + a + 1");
        assert_eq!(s.bodies[1].to_string(), "x - a + 1");
    }

    #[test]
    fn abs_outside_the_interval_is_resolved() {
        let env = AssumptionEnv::empty();
        let e = resolve_abs(&parse_expr("ln(abs(x))").unwrap(), &Bound::NegInf, &Bound::int(0), &env);
        assert_eq!(e.to_string(), "ln(-x)");
    }

    #[test]
    fn nested_abs_is_rejected() {
        let env = AssumptionEnv::empty();
        let r = split_abs(&parse_expr("abs(abs(x) - 1)").unwrap(), &Bound::NegInf, &Bound::PosInf, &env);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn side_limits_use_the_engine_at_singularities() {
        let env = AssumptionEnv::empty();
        let e = parse_expr("(1 - x)*ln(1 - x)").unwrap();
        assert_eq!(side_limit(&e, &Expr::int(1), Side::Left, &env).unwrap(), Bound::int(0));
        let e = parse_expr("-ln(x)").unwrap();
        assert_eq!(side_limit(&e, &Expr::int(0), Side::Right, &env).unwrap(), Bound::PosInf);
        let e = parse_expr("x^2/2").unwrap();
        assert_eq!(side_limit(&e, &Expr::int(3), Side::Left, &env).unwrap(), Bound::Finite(Expr::ratio(9, 2)));
    }

    #[test]
    fn breakpoints_sort_under_assumptions() {
        let env = parse_env(&["0 < l"]).unwrap();
        let v = vec![Expr::param("l"), parse_expr("-l").unwrap(), Expr::int(0), Expr::param("l")];
        let s = sort_unique(v, &env).unwrap();
        let txt: Vec<String> = s.iter().map(|e| e.to_string()).collect();
        assert_eq!(txt, vec!["-l", "0", "l"]);
    }
}
