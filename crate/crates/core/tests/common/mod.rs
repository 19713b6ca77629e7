//! Corpus and sampling helpers shared by the integration tests.
#![allow(dead_code)]

use symconvex::env::AssumptionEnv;
use symconvex::expr::{params_f64, ParamsF64};
use symconvex::monop::MonotoneOperator;
use symconvex::oracle::graph_points;
use symconvex::pwf::{parse_pwf, Domain, PiecewiseFunction};

/// Proper closed convex functions covering every piece kind.
pub const CORPUS: &[(&str, &str)] = &[
    ("abs", "abs(x)"),
    ("half_square", "x^2/2"),
    ("quartic", "x^4"),
    ("box", "pw{ x < -1 -> inf ; -1 <= x & x <= 2 -> 0 ; x > 2 -> inf }"),
    ("log_barrier", "pw{ x <= 0 -> inf ; x > 0 -> -ln(x) }"),
    ("exp", "exp(x)"),
    ("three_kinks", "pw{ x < -1 -> -3*x - 2 ; -1 <= x & x < 0 -> -x ; 0 <= x & x < 2 -> x/2 ; x >= 2 -> 2*x - 3 }"),
    ("relu", "pw{ x < 0 -> 0 ; x >= 0 -> x }"),
    ("huber", "pw{ x < -1 -> -x - 1/2 ; -1 <= x & x <= 1 -> x^2/2 ; x > 1 -> x - 1/2 }"),
    ("exp_affine_tail", "pw{ x < 0 -> exp(x) ; x >= 0 -> 1 + x }"),
    ("entropy", "pw{ x < 0 -> inf ; x = 0 -> 0 ; x > 0 -> x*ln(x) }"),
    ("half_line_quadratic", "pw{ x < 1 -> inf ; x >= 1 -> (x - 1)^2 + x }"),
];

pub fn corpus() -> Vec<(&'static str, PiecewiseFunction)> {
    CORPUS.iter().map(|(n, t)| (*n, parse(t))).collect()
}

pub fn parse(text: &str) -> PiecewiseFunction {
    parse_pwf(text, &AssumptionEnv::empty()).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn w() -> ParamsF64 {
    params_f64(&Default::default())
}

/// The domain of `f` intersected with `[-r, r]`, as a closed interval.
pub fn window(f: &PiecewiseFunction, r: f64) -> (f64, f64) {
    match f.domain() {
        Domain::Empty => panic!("empty domain"),
        Domain::Interval { lo, hi, .. } => {
            let (a, b) = (lo.eval_f64(&w()).unwrap(), hi.eval_f64(&w()).unwrap());
            (a.max(-r), b.min(r))
        }
    }
}

/// `n` points strictly inside `(a, b)`.
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * (k as f64 + 0.5) / n as f64).collect()
}

/// Distance from `u` to `T(x)`; infinite when `T(x)` is empty.
pub fn miss(t: &MonotoneOperator, x: f64, u: f64) -> f64 {
    match t.eval_f64(x, &w()).unwrap() {
        Some((lo, hi)) => (lo - u).max(u - hi).max(0.0),
        None => f64::INFINITY,
    }
}

/// At least `n` graph points of `t`.
pub fn graph(t: &MonotoneOperator, n: usize) -> Vec<(f64, f64)> {
    graph_points(t, n.div_ceil(t.pieces.len()), &w()).unwrap()
}

/// Largest miss of the points of `a`'s graph from `b`'s graph.
pub fn graph_excess(a: &MonotoneOperator, b: &MonotoneOperator, n: usize) -> (f64, Option<(f64, f64)>) {
    let mut worst = (0.0, None);
    for (x, u) in graph(a, n) {
        let m = miss(b, x, u);
        if m > worst.0 || m.is_nan() {
            worst = (m, Some((x, u)));
        }
    }
    worst
}
