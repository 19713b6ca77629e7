//! Brute-force numeric checks, independent of the symbolic pipelines.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::expr::ParamsF64;
use crate::monop::MonotoneOperator;
use crate::pwf::{Domain, PiecewiseFunction};

/// Seed for every randomized check.
pub const SEED: u64 = 0xC0FFEE;

/// Max over `n` evenly spaced `x` in `window` of `y x - f(x)`.
pub fn grid_conjugate(f: &PiecewiseFunction, y: f64, window: (f64, f64), n: usize, params: &ParamsF64) -> Result<f64> {
    let (lo, hi) = window;
    let n = n.max(2);
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let fx = f.eval_f64(x, params)?;
        if fx.is_finite() {
            best = best.max(y * x - fx);
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::WindowOutsideDomain);
    }
    Ok(best)
}

fn domain_f64(f: &PiecewiseFunction, params: &ParamsF64) -> Result<(f64, f64)> {
    match f.domain() {
        Domain::Empty => Err(Error::EmptyOperator),
        Domain::Interval { lo, hi, .. } => Ok((lo.eval_f64(params)?, hi.eval_f64(params)?)),
    }
}

/// Minimizer of `f(y) + (x - y)^2 / (2 lambda)` by golden-section search.
///
/// Kinks are located to `tol`. At a smooth minimizer, value comparisons stop
/// resolving at roughly the square root of machine epsilon, about 1e-8.
pub fn numeric_prox(f: &PiecewiseFunction, x: f64, lambda: f64, tol: f64, params: &ParamsF64) -> Result<f64> {
    let (dlo, dhi) = domain_f64(f, params)?;
    if dlo == dhi {
        return Ok(dlo);
    }
    let fx = |y: f64| f.eval_f64(y, params);
    // Sign of phi(a) - phi(b), arranged to avoid cancelling the quadratic terms.
    let less = |a: f64, b: f64| -> Result<bool> {
        let d = (fx(a)? - fx(b)?) + (b - a) * (2.0 * x - a - b) / (2.0 * lambda);
        Ok(d < 0.0)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for k in 0..64 {
        let r = 2f64.powi(k) * (1.0 + x.abs());
        let (a0, b0) = (dlo.max(x - r), dhi.min(x + r));
        let (mut a, mut b) = (a0, b0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut iters = 0;
        while b - a > tol && iters < 400 {
            if less(c, d)? {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
            iters += 1;
        }
        let y = 0.5 * (a + b);
        let stuck_lo = y - a0 < 2.0 * tol && a0 > dlo;
        let stuck_hi = b0 - y < 2.0 * tol && b0 < dhi;
        if !stuck_lo && !stuck_hi {
            return Ok(y);
        }
    }
    Err(Error::MaxIterations("prox bracket kept growing".into()))
}

/// Points of the graph: `per_piece` inside each single-valued piece, and
/// the ends and middle of each breakpoint value.
pub fn graph_points(t: &MonotoneOperator, per_piece: usize, params: &ParamsF64) -> Result<Vec<(f64, f64)>> {
    let bps = t.breakpoints_f64(params)?;
    let lo_w = bps.first().map_or(-10.0, |b| b - 10.0);
    let hi_w = bps.last().map_or(10.0, |b| b + 10.0);
    let mut out = Vec::new();
    for i in 0..t.pieces.len() {
        let lo = if i == 0 { lo_w } else { bps[i - 1] };
        let hi = if i == bps.len() { hi_w } else { bps[i] };
        for k in 0..per_piece {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / per_piece as f64;
            if let Some((u, _)) = t.eval_f64(x, params)? {
                if u.is_finite() {
                    out.push((x, u));
                }
            }
        }
    }
    for (i, v) in t.values.iter().enumerate() {
        let Some((l, h)) = v.eval_f64(params)? else { continue };
        let b = bps[i];
        let us = match (l.is_finite(), h.is_finite()) {
            (true, true) => vec![l, 0.5 * (l + h), h],
            (true, false) => vec![l, l + 1.0, l + 10.0],
            (false, true) => vec![h - 10.0, h - 1.0, h],
            (false, false) => vec![-10.0, 0.0, 10.0],
        };
        out.extend(us.into_iter().map(|u| (b, u)));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    /// Smallest `(x - y)(u - v)` seen; `+inf` with fewer than two points.
    pub min_product: f64,
    pub witness: Option<((f64, f64), (f64, f64))>,
    pub pairs: usize,
}

/// Random pairs of graph points and their inner products.
pub fn monotonicity_check(t: &MonotoneOperator, n_pairs: usize, params: &ParamsF64) -> Result<MonotonicityReport> {
    let pts = graph_points(t, 33, params)?;
    let mut rep = MonotonicityReport { min_product: f64::INFINITY, witness: None, pairs: 0 };
    if pts.len() < 2 {
        return Ok(rep);
    }
    let mut rng = StdRng::seed_from_u64(SEED);
    for _ in 0..n_pairs {
        let p = pts[rng.gen_range(0..pts.len())];
        let q = pts[rng.gen_range(0..pts.len())];
        let ip = (p.0 - q.0) * (p.1 - q.1);
        if ip < rep.min_product {
            rep.min_product = ip;
            rep.witness = Some((p, q));
        }
        rep.pairs += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::AssumptionEnv;
    use crate::expr::{params_f64, parse_expr};
    use crate::monop::{prox, OpKind};
    use crate::pwf::parse_pwf;

    fn w() -> ParamsF64 {
        params_f64(&Default::default())
    }

    fn pw(t: &str) -> PiecewiseFunction {
        parse_pwf(t, &AssumptionEnv::empty()).unwrap()
    }

    #[test]
    fn grid_conjugates() {
        assert!(grid_conjugate(&pw("abs(x)"), 0.5, (-5.0, 5.0), 1_000_001, &w()).unwrap().abs() < 1e-12);
        // Stationary point of x - x^4 is 4^(-1/3).
        let s = 4f64.powf(-1.0 / 3.0);
        let g = grid_conjugate(&pw("x^4"), 1.0, (-5.0, 5.0), 1_000_001, &w()).unwrap();
        assert!((g - (s - s.powi(4))).abs() < 1e-9);
        assert!((g - 0.472470).abs() < 1e-6);
        let q = grid_conjugate(&pw("x^2/2"), 2.0, (-5.0, 5.0), 1_000_001, &w()).unwrap();
        assert!((q - 2.0).abs() < 1e-9);
        let ind = pw("pw{ x < 20 -> inf ; x >= 20 -> 0 }");
        assert_eq!(grid_conjugate(&ind, 1.0, (-5.0, 5.0), 100, &w()), Err(Error::WindowOutsideDomain));
    }

    #[test]
    fn golden_section_prox() {
        assert!((numeric_prox(&pw("abs(x)"), 3.0, 1.0, 1e-12, &w()).unwrap() - 2.0).abs() < 1e-9);
        let box_ = pw("pw{ x < -1 -> inf ; -1 <= x & x <= 2 -> 0 ; x > 2 -> inf }");
        assert!((numeric_prox(&box_, 5.0, 1.0, 1e-12, &w()).unwrap() - 2.0).abs() < 1e-9);
        let e = numeric_prox(&pw("exp(x)"), 0.0, 1.0, 1e-12, &w()).unwrap();
        assert!((e + 0.567143).abs() < 1e-6);
        assert!((e + e.exp()).abs() < 1e-7);
    }

    #[test]
    fn monotonicity_reports() {
        let env = AssumptionEnv::empty();
        let soft = prox(&pw("abs(x)"), &crate::expr::Expr::int(1)).unwrap();
        assert!(monotonicity_check(&soft, 500, &w()).unwrap().min_product >= 0.0);
        let neg = MonotoneOperator::single("x", parse_expr("-x").unwrap(), OpKind::StrictMonotone, &env);
        let r = monotonicity_check(&neg, 500, &w()).unwrap();
        assert!(r.min_product < 0.0);
        assert!(r.witness.is_some());
    }
}
