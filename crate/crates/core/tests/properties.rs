//! Randomised invariants.

mod common;

use common::*;
use proptest::prelude::*;
use symconvex::conv::{biconjugate, conjugate};
use symconvex::dsl::parse_env;
use symconvex::env::{AssumptionEnv, Cmp};
use symconvex::expr::{
    antiderivative, compare_exprs, differentiate, eval_f64, invert_monotone, parse_expr, Bound, Expr, Params,
};
use symconvex::monop::{add, invert, maximal_extension, parse_op, prox, resolvent, scale, subdifferential};
use symconvex::number::Number;
use symconvex::oracle::monotonicity_check;
use symconvex::penalty::{recover_penalty, verify_penalty};
use symconvex::pwf::PieceKind;
use symconvex::risk::{
    cvar, quantile, superdistribution, superexpectation, superexpectation_conjugate, superquantile, DistributionSpec,
};
use symconvex::sep::{separable_prox, SeparableFunction};

/// Expressions with the open interval on which they are defined.
const EXPRS: &[(&str, f64, f64)] = &[
    ("x^2/2", -10.0, 10.0),
    ("x^4 - 3*x", -5.0, 5.0),
    ("exp(x)", -10.0, 5.0),
    ("exp(-2*x) + x", -3.0, 5.0),
    ("-ln(x)", 0.01, 10.0),
    ("x*ln(x)", 0.01, 10.0),
    ("sqrt(x + 1)", -0.99, 10.0),
    ("(x - 1)^2 + x", -10.0, 10.0),
    ("1/x + x", 0.1, 10.0),
    ("x^(1/3)", 0.01, 10.0),
];

/// Strictly increasing expressions and their open domains.
const INCREASING: &[(&str, f64, f64)] = &[
    ("2*x + 1", -10.0, 10.0),
    ("x^3", -5.0, 5.0),
    ("exp(x)", -10.0, 5.0),
    ("ln(x)", 0.01, 10.0),
    ("x + exp(x)", -10.0, 3.0),
    ("-1/x", 0.1, 10.0),
    ("x^5 + x", -3.0, 3.0),
];

fn at(t: &symconvex::monop::MonotoneOperator, x: f64) -> Option<(f64, f64)> {
    t.eval_f64(x, &w()).unwrap()
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn dists() -> Vec<(&'static str, DistributionSpec, f64)> {
    let env = AssumptionEnv::empty();
    vec![
        (
            "exponential",
            DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 - exp(-x) }", &env).unwrap(),
            f64::INFINITY,
        ),
        ("uniform", DistributionSpec::cdf("pw{ x < 0 -> 0 ; 0 <= x & x <= 1 -> x ; x > 1 -> 1 }", &env).unwrap(), 1.0),
        ("point_mass", DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 }", &env).unwrap(), 0.0),
        (
            "two_atoms",
            DistributionSpec::cdf("pw{ x < 0 -> 0 ; 0 <= x & x < 1 -> 1/2 ; x >= 1 -> 1 }", &env).unwrap(),
            1.0,
        ),
        ("triangular", DistributionSpec::quantile("sqrt(p)", &env).unwrap(), 1.0),
    ]
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn printing_round_trips(i in 0..EXPRS.len()) {
        let e = parse_expr(EXPRS[i].0).unwrap();
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn derivative_matches_central_difference(i in 0..EXPRS.len(), t in 0.0f64..1.0) {
        let (text, lo, hi) = EXPRS[i];
        let x = lo + 0.05 + (hi - lo - 0.1) * t;
        let e = parse_expr(text).unwrap();
        let d = eval_f64(&differentiate(&e).unwrap(), x, &w()).unwrap();
        let h = 1e-6;
        let fd = (eval_f64(&e, x + h, &w()).unwrap() - eval_f64(&e, x - h, &w()).unwrap()) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "{} at {}: {} vs {}", text, x, d, fd);
    }

    #[test]
    fn antiderivative_differentiates_back(i in 0..EXPRS.len(), t in 0.0f64..1.0) {
        let (text, lo, hi) = EXPRS[i];
        let x = lo + (hi - lo) * t;
        let e = parse_expr(text).unwrap();
        let Ok(prim) = antiderivative(&e) else { return Ok(()) };
        let back = eval_f64(&differentiate(&prim).unwrap(), x, &w()).unwrap();
        let v = eval_f64(&e, x, &w()).unwrap();
        prop_assert!((back - v).abs() <= 1e-12 * (1.0 + v.abs()), "{} at {}: {} vs {}", text, x, back, v);
    }

    #[test]
    fn inverse_undoes_the_map(i in 0..INCREASING.len(), t in 0.0f64..1.0) {
        let (text, lo, hi) = INCREASING[i];
        let e = parse_expr(text).unwrap();
        let env = AssumptionEnv::empty();
        let inv = invert_monotone(&e, &Bound::num(Number::Decimal(lo)), &Bound::num(Number::Decimal(hi)), &env).unwrap();
        let (a, b) = (eval_f64(&e, lo, &w()).unwrap(), eval_f64(&e, hi, &w()).unwrap());
        let y = a + (b - a) * (0.001 + 0.998 * t);
        let x = eval_f64(inv.inverse(), y, &w()).unwrap();
        let back = eval_f64(&e, x, &w()).unwrap();
        prop_assert!((back - y).abs() <= 1e-10 * (1.0 + y.abs()), "{}: {} -> {} -> {}", text, y, x, back);
    }

    #[test]
    fn comparison_is_antisymmetric_and_transitive(
        c in prop::array::uniform3((-20i64..20, 1i64..5)),
        k in prop::array::uniform3(-2i64..3),
    ) {
        let env = parse_env(&["0 < p", "p < 1"]).unwrap();
        let e: Vec<Expr> = (0..3)
            .map(|j| Expr::add(Expr::ratio(c[j].0, c[j].1), Expr::mul(Expr::int(k[j]), Expr::param("p"))))
            .collect();
        let cmp = |a: &Expr, b: &Expr| compare_exprs(a, b, &env).unwrap_or(Cmp::Undecidable);
        for a in &e {
            for b in &e {
                prop_assert_eq!(cmp(a, b), cmp(b, a).reverse());
            }
        }
        if cmp(&e[0], &e[1]) == Cmp::Less && cmp(&e[1], &e[2]) == Cmp::Less {
            prop_assert_eq!(cmp(&e[0], &e[2]), Cmp::Less);
        }
    }

    #[test]
    fn corpus_functions_are_convex_along_chords(i in 0..CORPUS.len(), s in 0.0f64..1.0, t in 0.0f64..1.0, th in 0.0f64..1.0) {
        let f = parse(CORPUS[i].1);
        let (lo, hi) = window(&f, 10.0);
        let (x, y) = (lo + (hi - lo) * s, lo + (hi - lo) * t);
        let (fx, fy) = (f.eval_f64(x, &w()).unwrap(), f.eval_f64(y, &w()).unwrap());
        let m = f.eval_f64(th * x + (1.0 - th) * y, &w()).unwrap();
        prop_assert!(m <= th * fx + (1.0 - th) * fy + 1e-10, "{} at {}, {}, {}", CORPUS[i].0, x, y, th);
    }

    #[test]
    fn fenchel_young(i in 0..CORPUS.len(), s in 0.0f64..1.0, y in -10.0f64..10.0) {
        let f = parse(CORPUS[i].1);
        let c = conjugate(&f).unwrap();
        let (lo, hi) = window(&f, 10.0);
        let x = lo + (hi - lo) * s;
        let (fx, cy) = (f.eval_f64(x, &w()).unwrap(), c.eval_f64(y, &w()).unwrap());
        if fx.is_finite() && cy.is_finite() {
            prop_assert!(fx + cy >= x * y - 1e-10, "{}: x={} y={}", CORPUS[i].0, x, y);
        }
        // Equality on the graph of the subdifferential.
        if let Some((a, b)) = at(&subdifferential(&f).unwrap(), x) {
            let u = if a.is_finite() { a } else { b };
            if u.is_finite() && fx.is_finite() {
                let gap = fx + c.eval_f64(u, &w()).unwrap() - x * u;
                prop_assert!(gap.abs() <= 1e-9 * (1.0 + (x * u).abs()), "{}: x={} u={} gap={}", CORPUS[i].0, x, u, gap);
            }
        }
    }

    #[test]
    fn invert_is_an_involution(i in 0..CORPUS.len(), num in 1i64..6, den in 1i64..4) {
        let t = scale(&subdifferential(&parse(CORPUS[i].1)).unwrap(), &Expr::ratio(num, den)).unwrap();
        let back = invert(&invert(&t).unwrap()).unwrap();
        for (a, b) in [(&t, &back), (&back, &t)] {
            let (m, pt) = graph_excess(a, b, 300);
            prop_assert!(m <= 1e-10, "{}: miss {} at {:?}", CORPUS[i].0, m, pt);
        }
    }

    #[test]
    fn resolvents_are_total_and_firmly_nonexpansive(i in 0..CORPUS.len(), j in 0..CORPUS.len(), num in 1i64..6, den in 1i64..4) {
        let sum = add(&subdifferential(&parse(CORPUS[i].1)).unwrap(), &subdifferential(&parse(CORPUS[j].1)).unwrap()).unwrap();
        prop_assume!(!sum.is_empty());
        let r = resolvent(&sum, &Expr::ratio(num, den)).unwrap();
        let probes = interior_grid(-50.0, 50.0, 100);
        let vals: Vec<f64> = probes.iter().map(|&x| {
            let (u, v) = at(&r, x).expect("resolvent is total");
            assert_eq!(u, v, "multivalued at {x}");
            u
        }).collect();
        for k in 0..probes.len() {
            for l in (k + 1..probes.len()).step_by(7) {
                let (dx, dr) = (probes[k] - probes[l], vals[k] - vals[l]);
                prop_assert!(dr * dr <= dx * dr + 1e-10, "{} + {}: {} {}", CORPUS[i].0, CORPUS[j].0, probes[k], probes[l]);
            }
        }
        prop_assert!(monotonicity_check(&r, 500, &w()).unwrap().min_product >= -1e-12);
    }

    #[test]
    fn moreau_with_any_step(i in 0..CORPUS.len(), num in 1i64..6, den in 1i64..4, x in -10.0f64..10.0) {
        // prox_{lf}(x) + l prox_{f*/l}(x/l) = x
        let f = parse(CORPUS[i].1);
        let l = num as f64 / den as f64;
        let p = prox(&f, &Expr::ratio(num, den)).unwrap();
        let q = prox(&conjugate(&f).unwrap(), &Expr::ratio(den, num)).unwrap();
        let (a, _) = at(&p, x).unwrap();
        let (b, _) = at(&q, x / l).unwrap();
        prop_assert!((a + l * b - x).abs() <= 1e-9 * (1.0 + x.abs()), "{}: {} + {} * {} vs {}", CORPUS[i].0, a, l, b, x);
    }

    #[test]
    fn coordinates_are_independent(i in 0..CORPUS.len(), j in 0..CORPUS.len(), x in prop::array::uniform2(-40i64..40)) {
        let (f, g) = (parse(CORPUS[i].1), parse(CORPUS[j].1));
        let sep = SeparableFunction { coords: vec![f.clone(), g.clone()] };
        let pt = [Number::ratio(x[0], 4), Number::ratio(x[1], 4)];
        let got = separable_prox(&sep, &Expr::int(1), &pt, &Params::new()).unwrap();
        for (k, h) in [f, g].iter().enumerate() {
            let direct = prox(h, &Expr::int(1)).unwrap().at_point(&Expr::rational(pt[k].as_rational().unwrap().clone())).unwrap().evaluated(&Params::new()).unwrap();
            prop_assert_eq!(&got[k], &direct);
        }
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn superquantile_dominates_quantile(d in 0usize..5, a in 1i64..999, b in 1i64..999) {
        let (name, spec, _) = &dists()[d];
        let none = Params::new();
        let (p, q) = (Number::ratio(a.min(b), 1000), Number::ratio(a.max(b), 1000));
        let (qp, qq) = (quantile(spec, &p, &none).unwrap().to_f64(), quantile(spec, &q, &none).unwrap().to_f64());
        let (sp, sq) = (superquantile(spec, &p, &none).unwrap().to_f64(), superquantile(spec, &q, &none).unwrap().to_f64());
        prop_assert!(qp <= qq + 1e-12 && sp <= sq + 1e-12, "{}: {} {} {} {}", name, qp, qq, sp, sq);
        prop_assert!(sp >= qp - 1e-12 && sq >= qq - 1e-12, "{}: {} {} {} {}", name, qp, qq, sp, sq);
    }

    #[test]
    fn superexpectation_bounds(d in 0usize..5, x in -5.0f64..5.0) {
        let (name, spec, sup) = &dists()[d];
        let e = superexpectation(spec).unwrap();
        let mean = e.eval_f64(-1e3, &w()).unwrap();
        let v = e.eval_f64(x, &w()).unwrap();
        prop_assert!(v >= x.max(mean) - 1e-12, "{}: E({}) = {}", name, x, v);
        if x >= *sup {
            prop_assert!((v - x).abs() <= 1e-12, "{}: E({}) = {}", name, x, v);
        }
    }
}

#[test]
fn superexpectations_validate() {
    for (name, spec, _) in dists() {
        let e = superexpectation(&spec).unwrap();
        e.validate().unwrap_or_else(|err| panic!("{name}: {err}"));
    }
}

#[test]
fn superdistribution_is_the_inverse_of_the_quantile_operator() {
    for (name, spec, _) in dists() {
        let fd = superdistribution(&spec).unwrap();
        let qd = invert(&subdifferential(&superexpectation_conjugate(&spec).unwrap()).unwrap()).unwrap();
        for (a, b) in [(&fd, &qd), (&qd, &fd)] {
            let (m, pt) = graph_excess(a, b, 400);
            assert!(m <= 1e-9, "{name}: miss {m:e} at {pt:?}");
        }
    }
}

#[test]
fn cvar_approaches_the_essential_supremum() {
    let p = Number::Decimal(1.0 - 1e-6);
    for (name, spec, sup) in dists() {
        if sup.is_finite() {
            let c = cvar(&spec, &p, &Params::new()).unwrap().to_f64();
            assert!((c - sup).abs() <= 1e-3, "{name}: {c}");
        }
    }
}

#[test]
fn lower_semicontinuous_at_breakpoints() {
    for (name, f) in corpus() {
        for (k, b) in f.breakpoints_f64(&w()).unwrap().into_iter().enumerate() {
            let side = |i: usize| {
                let p = &f.pieces[i];
                let v = if p.is_finite() { eval_f64(&p.body, b, &w()).unwrap_or(f64::INFINITY) } else { f64::INFINITY };
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            };
            let limit = side(k).min(side(k + 1));
            assert!(f.eval_f64(b, &w()).unwrap() <= limit + 1e-12, "{name} at {b}");
        }
    }
}

#[test]
fn affine_pieces_have_no_curvature() {
    for (name, f) in corpus() {
        let bps = f.breakpoints_f64(&w()).unwrap();
        for (i, p) in f.pieces.iter().enumerate() {
            if p.kind != PieceKind::Affine {
                continue;
            }
            let lo = if i == 0 { -10.0 } else { bps[i - 1] };
            let hi = if i == bps.len() { 10.0 } else { bps[i] };
            for x in interior_grid(lo, hi, 20) {
                let h = (hi - lo) / 100.0;
                let d2 = eval_f64(&p.body, x + h, &w()).unwrap() - 2.0 * eval_f64(&p.body, x, &w()).unwrap()
                    + eval_f64(&p.body, x - h, &w()).unwrap();
                assert!(d2.abs() <= 1e-12 * (1.0 + x.abs()), "{name} piece {i} at {x}: {d2}");
            }
        }
    }
}

#[test]
fn biconjugate_keeps_piece_kinds() {
    for (name, f) in corpus() {
        let b = biconjugate(&f).unwrap();
        assert_eq!(b.breakpoints_f64(&w()).unwrap(), f.breakpoints_f64(&w()).unwrap(), "{name}");
        let kinds = |g: &symconvex::pwf::PiecewiseFunction| g.pieces.iter().map(|p| p.kind).collect::<Vec<_>>();
        assert_eq!(kinds(&b), kinds(&f), "{name}");
    }
}

#[test]
fn maximal_extension_is_idempotent() {
    let h1 = "sd{ x < -1 -> {x} ; x = -1 -> {0, x} ; -1 < x & x < 1 -> {0} ; x = 1 -> {0, x} ; x > 1 -> {x} }";
    let mut ops = vec![parse_op(h1, &AssumptionEnv::empty()).unwrap()];
    ops.extend(corpus().iter().map(|(_, f)| prox(f, &Expr::int(1)).unwrap()));
    for t in ops {
        let once = maximal_extension(&t).unwrap();
        let twice = maximal_extension(&once).unwrap();
        for (a, b) in [(&once, &twice), (&twice, &once)] {
            let (m, pt) = graph_excess(a, b, 300);
            assert!(m <= 1e-10, "{t}: miss {m:e} at {pt:?}");
        }
        let (m, _) = graph_excess(&t, &once, 300);
        assert!(m <= 1e-10, "extension of {t} lost graph points");
    }
}

#[test]
fn recovered_penalties_are_weakly_convex() {
    let h1 = "sd{ x < -1 -> {x} ; x = -1 -> {0, x} ; -1 < x & x < 1 -> {0} ; x = 1 -> {0, x} ; x > 1 -> {x} }";
    let mut ops = vec![parse_op(h1, &AssumptionEnv::empty()).unwrap()];
    ops.extend(corpus().iter().map(|(_, f)| prox(f, &Expr::int(1)).unwrap()));
    for t in ops {
        let f = recover_penalty(&t).unwrap();
        f.add_quadratic(&Number::one()).validate().unwrap_or_else(|e| panic!("{t}: {e}"));
        assert!(verify_penalty(&t, &f, &w()).unwrap().pass, "{t}");
    }
}
