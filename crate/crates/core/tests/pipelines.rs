//! End-to-end examples through the public API.

mod common;

use common::*;
use symconvex::conv::{biconjugate, conjugate, integ};
use symconvex::dsl::parse_env;
use symconvex::env::AssumptionEnv;
use symconvex::error::Error;
use symconvex::expr::{rat, Expr, Params};
use symconvex::monop::{
    add, eval_op, invert, maximal_extension, parse_op, prox, resolvent, scale, subdifferential, MonotoneOperator,
    OpKind, SetValue,
};
use symconvex::number::{ExtReal, Number};
use symconvex::oracle::{grid_conjugate, monotonicity_check, numeric_prox};
use symconvex::penalty::{recover_penalty, verify_penalty};
use symconvex::pwf::{parse_pwf, Domain};
use symconvex::risk::{cvar, quantile, superdistribution, superexpectation, superquantile, DistributionSpec};
use symconvex::sep::{separable_conjugate, separable_prox, SeparableFunction};

fn at(t: &MonotoneOperator, x: f64) -> Option<(f64, f64)> {
    t.eval_f64(x, &w()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn op(text: &str) -> MonotoneOperator {
    parse_op(text, &AssumptionEnv::empty()).unwrap()
}

fn exponential() -> DistributionSpec {
    DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 - exp(-x) }", &AssumptionEnv::empty()).unwrap()
}

fn uniform() -> DistributionSpec {
    DistributionSpec::cdf("pw{ x < 0 -> 0 ; 0 <= x & x <= 1 -> x ; x > 1 -> 1 }", &AssumptionEnv::empty()).unwrap()
}

fn point_mass() -> DistributionSpec {
    DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 }", &AssumptionEnv::empty()).unwrap()
}

#[test]
fn jump_in_the_domain_is_rejected() {
    let err = parse_pwf("pw{ x<0 -> 0 ; x>=0 -> 1 }", &AssumptionEnv::empty()).unwrap_err();
    assert!(matches!(err, Error::DiscontinuousOnDomain(..)), "{err}");
}

#[test]
fn nonconvex_input_is_rejected() {
    let err = parse_pwf("pw{ x<0 -> -x^2 ; x>=0 -> x^2 }", &AssumptionEnv::empty()).unwrap_err();
    assert!(matches!(err, Error::NonConvex(_)), "{err}");
}

#[test]
fn domains() {
    let env = parse_env(&["a < b"]).unwrap();
    let ind = parse_pwf("pw{ x<a -> inf ; a<=x & x<=b -> 0 ; x>b -> inf }", &env).unwrap();
    let Domain::Interval { lo, hi, .. } = ind.domain() else { panic!() };
    assert_eq!((lo.text(), hi.text()), ("a".to_string(), "b".to_string()));
    let log = parse("pw{ x <= 0 -> inf ; x > 0 -> -ln(x) }");
    assert!(log.eval_f64(0.0, &w()).unwrap().is_infinite());
    assert_eq!(window(&log, 10.0), (0.0, 10.0));
}

#[test]
fn superexpectation_value_with_a_rate_parameter() {
    let env = parse_env(&["0 < l"]).unwrap();
    let d = DistributionSpec::cdf("pw{ x < 0 -> 0 ; x >= 0 -> 1 - exp(-l*x) }", &env).unwrap();
    let e = superexpectation(&d).unwrap();
    let params = Params::from([("l".to_string(), rat(1, 1))]);
    let v = e.eval(&ExtReal::Finite(Number::int(1)), &params).unwrap().to_f64();
    assert!(close(v, 1.0 + (-1f64).exp(), 1e-12), "{v}");
}

#[test]
fn subdifferential_examples() {
    let t = subdifferential(&parse("abs(x)")).unwrap();
    assert_eq!(at(&t, 0.0), Some((-1.0, 1.0)));
    assert_eq!(at(&t, -3.0), Some((-1.0, -1.0)));
    let b = subdifferential(&parse(BOX)).unwrap();
    assert_eq!(at(&b, -1.0), Some((f64::NEG_INFINITY, 0.0)));
    assert_eq!(at(&b, 2.0), Some((0.0, f64::INFINITY)));
    assert_eq!(at(&b, 3.0), None);
}

const BOX: &str = "pw{ x < -1 -> inf ; -1 <= x & x <= 2 -> 0 ; x > 2 -> inf }";

fn unit_box(lo: i64, hi: i64) -> MonotoneOperator {
    let text = format!("pw{{ x < {lo} -> inf ; {lo} <= x & x <= {hi} -> 0 ; x > {hi} -> inf }}");
    subdifferential(&parse(&text)).unwrap()
}

#[test]
fn scaling_and_sums() {
    let t = subdifferential(&parse("abs(x)")).unwrap();
    assert_eq!(at(&scale(&t, &Expr::int(2)).unwrap(), 0.0), Some((-2.0, 2.0)));
    assert_eq!(at(&scale(&t, &Expr::int(0)).unwrap(), 5.0), Some((0.0, 0.0)));
    assert!(matches!(scale(&t, &Expr::int(-1)), Err(Error::NegativeScalar(_))));
    let s = add(&t, &MonotoneOperator::identity("x", &AssumptionEnv::empty())).unwrap();
    assert_eq!(at(&s, 0.0), Some((-1.0, 1.0)));
    assert_eq!(at(&s, 2.0), Some((3.0, 3.0)));
    assert!(add(&unit_box(0, 1), &unit_box(2, 3)).unwrap().is_empty());
    let touch = add(&unit_box(0, 1), &unit_box(1, 2)).unwrap();
    assert_eq!(eval_op(&touch, &ExtReal::Finite(Number::int(1)), &Params::new()).unwrap(), SetValue::All);
    assert_eq!(at(&touch, 0.5), None);
    assert_eq!(at(&touch, 1.5), None);
}

#[test]
fn inverse_examples() {
    let cube = invert(&op("{x^3}")).unwrap();
    assert!(close(at(&cube, 8.0).unwrap().0, 2.0, 1e-12));
    assert!(close(at(&cube, -27.0).unwrap().0, -3.0, 1e-12));
    let zero = invert(&op("{0}")).unwrap();
    let v = eval_op(&zero, &ExtReal::Finite(Number::zero()), &Params::new()).unwrap();
    assert_eq!(v, SetValue::All);
    assert_eq!(at(&zero, 1.0), None);
    let abs_inv = invert(&subdifferential(&parse("abs(x)")).unwrap()).unwrap();
    assert_eq!(at(&abs_inv, 1.0), Some((0.0, f64::INFINITY)));
    assert_eq!(at(&abs_inv, 0.3), Some((0.0, 0.0)));
    assert_eq!(at(&abs_inv, 1.5), None);
}

#[test]
fn resolvent_examples() {
    let half = resolvent(&MonotoneOperator::identity("x", &AssumptionEnv::empty()), &Expr::int(1)).unwrap();
    assert_eq!(at(&half, 3.0), Some((1.5, 1.5)));
    let proj = prox(&parse(BOX), &Expr::int(1)).unwrap();
    assert_eq!(at(&proj, 5.0), Some((2.0, 2.0)));
    assert_eq!(at(&proj, -7.0), Some((-1.0, -1.0)));
    assert_eq!(at(&proj, 0.25), Some((0.25, 0.25)));
    let soft = prox(&parse("abs(x)"), &Expr::int(1)).unwrap();
    let v = eval_op(&soft, &ExtReal::Finite(Number::int(-1)), &Params::new()).unwrap();
    assert_eq!(v.eval_f64(&w()).unwrap(), Some((0.0, 0.0)));
}

#[test]
fn prox_of_exp_matches_the_golden_section_oracle() {
    let f = parse("exp(x)");
    let p = prox(&f, &Expr::int(1)).unwrap();
    let sym = at(&p, 0.0).unwrap().0;
    assert!(close(sym, -0.567143290409784, 1e-12), "{sym}");
    // Value comparisons cannot resolve a smooth minimizer much below 1e-8.
    assert!(close(numeric_prox(&f, 0.0, 1.0, 1e-12, &w()).unwrap(), sym, 1e-8));
}

#[test]
fn maximal_extension_examples() {
    let id = MonotoneOperator::identity("x", &AssumptionEnv::empty());
    let e = maximal_extension(&id).unwrap();
    for x in [-4.0, 0.0, 2.5] {
        assert_eq!(at(&e, x), Some((x, x)));
    }
    let flat = op("sd{ x <= 0 -> empty ; 0 < x & x < 1 -> {0} ; x >= 1 -> empty }");
    let e = maximal_extension(&flat).unwrap();
    assert_eq!(at(&e, 0.0), Some((f64::NEG_INFINITY, 0.0)));
    assert_eq!(at(&e, 0.5), Some((0.0, 0.0)));
    assert_eq!(at(&e, 1.0), Some((0.0, f64::INFINITY)));
    assert_eq!(at(&e, 2.0), None);
    assert!(matches!(
        maximal_extension(&op("sd{ x < 0 -> empty ; x = 0 -> empty ; x > 0 -> empty }")),
        Err(Error::EmptyOperator)
    ));
}

#[test]
fn integration_examples() {
    let t = subdifferential(&parse("abs(x)")).unwrap();
    let f = integ(&t, &Expr::int(0), &Expr::int(0)).unwrap();
    for x in [-3.0, 0.0, 0.5] {
        assert!(close(f.eval_f64(x, &w()).unwrap(), x.abs(), 1e-15));
    }
    let cdf = exponential().operator().unwrap();
    let e0 = integ(&cdf, &Expr::int(0), &Expr::int(1)).unwrap();
    assert!(close(e0.eval_f64(2.0, &w()).unwrap(), 2.0 + (-2f64).exp(), 1e-12));
}

#[test]
fn conjugate_examples() {
    let c = conjugate(&parse("abs(x)")).unwrap();
    assert_eq!(c.eval_f64(0.7, &w()).unwrap(), 0.0);
    assert!(c.eval_f64(1.1, &w()).unwrap().is_infinite());
    let q = conjugate(&parse("x^4")).unwrap().eval_f64(1.0, &w()).unwrap();
    let grid = grid_conjugate(&parse("x^4"), 1.0, (-2.0, 2.0), 1_000_000, &w()).unwrap();
    // Stationarity 4x^3 = 1 gives f*(1) = (3/4) 4^(-1/3).
    assert!(close(q, 0.75 * 4f64.powf(-1.0 / 3.0), 1e-12), "{q}");
    assert!(close(q, grid, 1e-9), "{q} vs {grid}");
    let b = biconjugate(&parse(BOX)).unwrap();
    for x in [-1.5, -1.0, 0.0, 2.0, 2.5] {
        assert_eq!(b.eval_f64(x, &w()).unwrap(), parse(BOX).eval_f64(x, &w()).unwrap());
    }
    let h = biconjugate(&parse("x^2/2")).unwrap();
    assert!(close(h.eval_f64(3.0, &w()).unwrap(), 4.5, 1e-12));
}

#[test]
fn penalty_examples() {
    let env = AssumptionEnv::empty();
    let id = MonotoneOperator::identity("x", &env);
    let f = recover_penalty(&id).unwrap();
    for y in [-3.0, 0.0, 1.25] {
        assert!(close(f.eval_f64(y, &w()).unwrap(), 0.0, 1e-15));
    }
    assert!(verify_penalty(&id, &f, &w()).unwrap().pass);
    let proj = prox(&parse(BOX), &Expr::int(1)).unwrap();
    let g = recover_penalty(&proj).unwrap();
    assert_eq!(g.eval_f64(0.5, &w()).unwrap(), 0.0);
    assert!(g.eval_f64(2.5, &w()).unwrap().is_infinite());
    assert!(verify_penalty(&proj, &g, &w()).unwrap().pass);
}

#[test]
fn penalty_round_trip_through_prox() {
    for (name, g) in corpus() {
        let p = prox(&g, &Expr::int(1)).unwrap();
        let f = recover_penalty(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
        let rep = verify_penalty(&p, &f, &w()).unwrap();
        assert!(rep.pass, "{name}: {rep:?}");
        let back = prox(&f, &Expr::int(1)).unwrap();
        let (m, pt) = graph_excess(&back, &p, 200);
        assert!(m <= 1e-9, "{name}: {m:e} at {pt:?}");
    }
}

#[test]
fn risk_examples() {
    let none = Params::new();
    let e = superexpectation(&uniform()).unwrap();
    assert_eq!(e.eval(&ExtReal::Finite(Number::ratio(1, 2)), &none).unwrap(), ExtReal::rational(rat(5, 8)));
    let pm = superexpectation(&point_mass()).unwrap();
    for x in [-2.0, 0.0, 3.0] {
        assert_eq!(pm.eval_f64(x, &w()).unwrap(), x.max(0.0));
    }
    let fd = superdistribution(&exponential()).unwrap();
    assert!(close(at(&fd, 1.0).unwrap().0, 1.0 - (-1f64).exp(), 1e-12));
    assert_eq!(at(&fd, -1.0), Some((0.0, 0.0)));
    assert_eq!(at(&superdistribution(&point_mass()).unwrap(), 0.0), Some((0.0, 1.0)));
    let sq = superquantile(&uniform(), &Number::ratio(1, 2), &none).unwrap();
    assert!(close(sq.to_f64(), 0.75, 1e-12));
    for p in [Number::ratio(1, 10), Number::ratio(9, 10)] {
        assert_eq!(quantile(&point_mass(), &p, &none).unwrap().to_f64(), 0.0);
    }
    assert_eq!(quantile(&uniform(), &Number::ratio(1, 4), &none).unwrap(), ExtReal::rational(rat(1, 4)));
    let c = cvar(&exponential(), &Number::ratio(19, 20), &none).unwrap().to_f64();
    assert!(close(c, 1.0 + 20f64.ln(), 1e-12), "{c}");
    assert!(close(cvar(&uniform(), &Number::ratio(9, 10), &none).unwrap().to_f64(), 0.95, 1e-12));
    assert!(matches!(cvar(&uniform(), &Number::one(), &none), Err(Error::POutOfRange(_))));
}

#[test]
fn separable_examples() {
    let env = AssumptionEnv::empty();
    let l1 = SeparableFunction::parse("abs(x) ;; abs(x)", &env).unwrap();
    let c = separable_conjugate(&l1).unwrap();
    assert_eq!(c.dim(), 2);
    for f in &c.coords {
        assert_eq!(f.eval_f64(-1.0, &w()).unwrap(), 0.0);
        assert!(f.eval_f64(1.5, &w()).unwrap().is_infinite());
    }
    let none = Params::new();
    let x = [Number::int(2), Number::ratio(-1, 2)];
    let p = separable_prox(&l1, &Expr::int(1), &x, &none).unwrap();
    assert_eq!(p, vec![SetValue::Point(Expr::int(1)), SetValue::Point(Expr::int(0))]);
    let boxes = SeparableFunction::parse(
        "pw{ x < 0 -> inf ; 0 <= x & x <= 1 -> 0 ; x > 1 -> inf } ;; pw{ x < 0 -> inf ; 0 <= x & x <= 1 -> 0 ; x > 1 -> inf }",
        &env,
    )
    .unwrap();
    let p = separable_prox(&boxes, &Expr::int(1), &[Number::int(2), Number::int(-1)], &none).unwrap();
    assert_eq!(p, vec![SetValue::Point(Expr::int(1)), SetValue::Point(Expr::int(0))]);
    assert!(matches!(separable_prox(&l1, &Expr::int(1), &x[..1], &none), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn oracle_examples() {
    // The grid misses the maximizer by up to one spacing.
    assert!(close(grid_conjugate(&parse("abs(x)"), 0.5, (-5.0, 5.0), 1_000_000, &w()).unwrap(), 0.0, 1e-5));
    assert!(close(grid_conjugate(&parse("x^2/2"), 2.0, (-10.0, 10.0), 100_000, &w()).unwrap(), 2.0, 1e-6));
    assert!(close(numeric_prox(&parse("abs(x)"), 3.0, 1.0, 1e-10, &w()).unwrap(), 2.0, 1e-9));
    assert!(close(numeric_prox(&parse(BOX), 5.0, 1.0, 1e-10, &w()).unwrap(), 2.0, 1e-9));
    let soft = prox(&parse("abs(x)"), &Expr::int(1)).unwrap();
    assert!(monotonicity_check(&soft, 500, &w()).unwrap().min_product >= 0.0);
    assert!(matches!(parse_op("{-x}", &AssumptionEnv::empty()), Err(Error::NotMonotone(_))));
    let flip = MonotoneOperator::single("x", Expr::neg(Expr::Var), OpKind::StrictMonotone, &AssumptionEnv::empty());
    let rep = monotonicity_check(&flip, 500, &w()).unwrap();
    assert!(rep.min_product < 0.0 && rep.witness.is_some(), "{rep:?}");
}
