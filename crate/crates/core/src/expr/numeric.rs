//! Numeric fallbacks: inverses without a closed form and antiderivatives
//! outside the elementary table.

use std::sync::OnceLock;

use super::{eval_f64, Bound, Expr, ParamsF64};
use crate::error::{Error, Result};

const BISECTION_REL_TOL: f64 = 1e-14;
const BISECTION_MAX_ITER: usize = 200;

/// Inverse of a strictly increasing `forward` on the open interval
/// `(lo, hi)`, evaluated by bracketing and bisection.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitInverse {
    pub forward: Expr,
    pub lo: Bound,
    pub hi: Bound,
}

impl ImplicitInverse {
    pub(super) fn map_params(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> ImplicitInverse {
        let g = |e: &Expr| match e {
            Expr::Var => None,
            _ => f(e),
        };
        let mb = |b: &Bound| match b {
            Bound::Finite(e) => Bound::Finite(e.map_leaves(&g)),
            other => other.clone(),
        };
        ImplicitInverse { forward: self.forward.map_leaves(&g), lo: mb(&self.lo), hi: mb(&self.hi) }
    }

    /// The `t` in `(lo, hi)` with `forward(t) = y`.
    pub fn solve(&self, y: f64, params: &ParamsF64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain("implicit inverse at a non-finite point".into()));
        }
        let lo_b = self.lo.eval_f64(params)?;
        let hi_b = self.hi.eval_f64(params)?;
        let g = |t: f64| eval_f64(&self.forward, t, params);
        // Establish a bracket [a, b] with g(a) <= y <= g(b), staying inside (lo, hi).
        let seed = if lo_b.is_finite() && hi_b.is_finite() {
            0.5 * (lo_b + hi_b)
        } else if lo_b.is_finite() {
            lo_b + 1.0
        } else if hi_b.is_finite() {
            hi_b - 1.0
        } else {
            0.0
        };
        let below = |t: f64| -> bool { g(t).map(|v| v < y).unwrap_or(t < seed) };
        let (mut a, mut b);
        if below(seed) {
            a = seed;
            b = if hi_b.is_finite() { hi_b } else { seed + 1.0 };
            let mut step = 1.0;
            let mut n = 0;
            while !hi_b.is_finite() && below(b) {
                a = b;
                step *= 2.0;
                b = seed + step;
                n += 1;
                if n > 2000 || !b.is_finite() {
                    return Err(Error::MaxIterations("implicit inverse bracket expansion".into()));
                }
            }
        } else {
            b = seed;
            a = if lo_b.is_finite() { lo_b } else { seed - 1.0 };
            let mut step = 1.0;
            let mut n = 0;
            while !lo_b.is_finite() && !below(a) {
                b = a;
                step *= 2.0;
                a = seed - step;
                n += 1;
                if n > 2000 || !a.is_finite() {
                    return Err(Error::MaxIterations("implicit inverse bracket expansion".into()));
                }
            }
        }
        for _ in 0..BISECTION_MAX_ITER {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            match g(m) {
                Ok(v) if v == y => return Ok(m),
                Ok(v) if v < y => a = m,
                Ok(_) => b = m,
                // Undefined near an open endpoint: move away from it.
                Err(_) => {
                    if lo_b.is_finite() && (m - lo_b).abs() < (hi_b - m).abs() {
                        a = m
                    } else {
                        b = m
                    }
                }
            }
            if (b - a) <= BISECTION_REL_TOL * (a.abs().max(b.abs())).max(1e-300) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// `t -> integral of integrand from `from` to t`, by adaptive composite
/// Gauss-Legendre quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericIntegral {
    pub integrand: Expr,
    pub from: Expr,
}

impl NumericIntegral {
    pub(super) fn map_params(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> NumericIntegral {
        let g = |e: &Expr| match e {
            Expr::Var => None,
            _ => f(e),
        };
        NumericIntegral { integrand: self.integrand.map_leaves(&g), from: self.from.map_leaves(&g) }
    }

    pub fn eval(&self, upper: f64, params: &ParamsF64) -> Result<f64> {
        let a = eval_f64(&self.from, 0.0, params)?;
        let f = |t: f64| eval_f64(&self.integrand, t, params);
        integrate(&f, a, upper, 1e-10)
    }
}

/// `n` Chebyshev points strictly inside `(lo, hi)`, after clipping each
/// infinite end to `clip` units from the other end (or from 0).
pub(crate) fn chebyshev_nodes(lo: f64, hi: f64, clip: f64, n: usize) -> Vec<f64> {
    let (a, b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo.max(0.0) + clip),
        (false, true) => (hi.min(0.0) - clip, hi),
        (false, false) => (-clip, clip),
    };
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (0..n).map(|k| c - h * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()).collect()
}

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub(crate) fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(16))
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in gauss_legendre() {
        s += w * f(c + h * x)?;
    }
    Ok(s * h)
}

fn composite(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for i in 0..panels {
        s += panel(f, a + i as f64 * h, a + (i + 1) as f64 * h)?;
    }
    Ok(s)
}

/// Four 16-node panels (64 nodes) per interval, bisected until two
/// successive refinements agree.
pub(crate) fn integrate(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("quadrature over an unbounded interval".into()));
    }
    adaptive(f, a, b, tol, 0)
}

fn adaptive(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let coarse = composite(f, a, b, 4)?;
    let fine = composite(f, a, b, 8)?;
    if (fine - coarse).abs() <= tol * (1.0 + fine.abs()) || depth >= 12 {
        return Ok(fine);
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, tol, depth + 1)? + adaptive(f, m, b, tol, depth + 1)?)
}
