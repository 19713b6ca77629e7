//! Piecewise set-valued monotone operators and their calculus.

use std::cmp::Ordering;
use std::fmt;

use crate::conv;
use crate::dsl::{layout, parse_branches, Branch, Guard, PointOwner};
use crate::env::{AssumptionEnv, Cmp};
use crate::error::{Error, Result};
use crate::expr::{
    compare_exprs, differentiate, eval, eval_f64, invert_monotone, simplify, Bound, Expr, Params, ParamsF64, Parser,
    Tok,
};
use crate::number::{ExtReal, Number};
use crate::piece::{end_limit, interval_of, locate, locate_f64, side_limit, sort_unique, trend, Loc, Side, Trend};
use crate::pwf::{rows, write_rows, PiecewiseFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Constant,
    StrictMonotone,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Constant => "constant",
            OpKind::StrictMonotone => "strictly-monotone",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpPiece {
    Single { body: Expr, kind: OpKind },
    Empty,
}

impl OpPiece {
    pub fn body(&self) -> Option<&Expr> {
        match self {
            OpPiece::Single { body, .. } => Some(body),
            OpPiece::Empty => None,
        }
    }
}

/// Value of a set-valued map at one point.
#[derive(Clone, Debug, PartialEq)]
pub enum SetValue {
    Empty,
    Point(Expr),
    /// Closed interval; at least one end differs from the other.
    Interval(Bound, Bound),
    All,
}

fn bound_add(a: &Bound, b: &Bound) -> Result<Bound> {
    Ok(match (a, b) {
        (Bound::Finite(x), Bound::Finite(y)) => Bound::Finite(simplify(&Expr::add(x.clone(), y.clone()))),
        (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => {
            return Err(Error::Internal("inf - inf in an interval sum".into()))
        }
        (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
        _ => Bound::PosInf,
    })
}

fn bound_scale(a: &Bound, l: &Expr) -> Bound {
    match a {
        Bound::Finite(x) => Bound::Finite(simplify(&Expr::mul(l.clone(), x.clone()))),
        inf => inf.clone(),
    }
}

impl SetValue {
    /// Closed interval `[lo, hi]`, collapsed to a point or the whole line
    /// where appropriate.
    pub fn interval(lo: Bound, hi: Bound, env: &AssumptionEnv) -> Result<SetValue> {
        Ok(match (&lo, &hi) {
            (Bound::NegInf, Bound::PosInf) => SetValue::All,
            (Bound::Finite(a), Bound::Finite(_)) => match lo.cmp_strict(&hi, env)? {
                Ordering::Equal => SetValue::Point(a.clone()),
                Ordering::Less => SetValue::Interval(lo, hi),
                Ordering::Greater => {
                    return Err(Error::NotMonotone(format!("interval [{}, {}]", lo.text(), hi.text())))
                }
            },
            (Bound::PosInf, _) | (_, Bound::NegInf) => SetValue::Empty,
            _ => SetValue::Interval(lo, hi),
        })
    }

    pub fn bounds(&self) -> Option<(Bound, Bound)> {
        match self {
            SetValue::Empty => None,
            SetValue::Point(v) => Some((Bound::Finite(v.clone()), Bound::Finite(v.clone()))),
            SetValue::Interval(a, b) => Some((a.clone(), b.clone())),
            SetValue::All => Some((Bound::NegInf, Bound::PosInf)),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SetValue::Empty)
    }

    /// Minkowski sum; empty if either side is.
    pub fn add(&self, o: &SetValue, env: &AssumptionEnv) -> Result<SetValue> {
        match (self.bounds(), o.bounds()) {
            (Some((a, b)), Some((c, d))) => SetValue::interval(bound_add(&a, &c)?, bound_add(&b, &d)?, env),
            _ => Ok(SetValue::Empty),
        }
    }

    /// Smallest closed interval holding both.
    pub fn hull(&self, o: &SetValue, env: &AssumptionEnv) -> Result<SetValue> {
        match (self.bounds(), o.bounds()) {
            (None, _) => Ok(o.clone()),
            (_, None) => Ok(self.clone()),
            (Some((a, b)), Some((c, d))) => {
                let lo = if a.cmp_strict(&c, env)? == Ordering::Greater { c } else { a };
                let hi = if b.cmp_strict(&d, env)? == Ordering::Less { d } else { b };
                SetValue::interval(lo, hi, env)
            }
        }
    }

    /// Numeric end points, `None` when empty.
    pub fn eval_f64(&self, params: &ParamsF64) -> Result<Option<(f64, f64)>> {
        Ok(match self.bounds() {
            None => None,
            Some((a, b)) => Some((a.eval_f64(params)?, b.eval_f64(params)?)),
        })
    }

    /// The same set with every end point evaluated.
    pub fn evaluated(&self, params: &Params) -> Result<SetValue> {
        let ev = |b: &Bound| -> Result<Bound> {
            Ok(match b.eval(params)? {
                ExtReal::Finite(n) => Bound::num(n),
                ExtReal::PosInf => Bound::PosInf,
                ExtReal::NegInf => Bound::NegInf,
            })
        };
        Ok(match self {
            SetValue::Point(v) => match ev(&Bound::Finite(v.clone()))? {
                Bound::Finite(e) => SetValue::Point(e),
                _ => SetValue::Empty,
            },
            SetValue::Interval(a, b) => SetValue::Interval(ev(a)?, ev(b)?),
            other => other.clone(),
        })
    }

    fn text(&self) -> String {
        match self {
            SetValue::Empty => "empty".into(),
            SetValue::All => "all".into(),
            SetValue::Point(v) => format!("{{{v}}}"),
            SetValue::Interval(a, b) => format!("[{}, {}]", a.text(), b.text()),
        }
    }
}

impl fmt::Display for SetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneOperator {
    pub var: String,
    pub breakpoints: Vec<Expr>,
    pub pieces: Vec<OpPiece>,
    pub values: Vec<SetValue>,
    pub env: AssumptionEnv,
    /// Some piece is evaluated numerically.
    pub numeric: bool,
}

/// The other letter of the `x`/`y` pair used for dual variables.
pub fn dual_var(v: &str) -> String {
    match v {
        "x" => "y".into(),
        "y" => "x".into(),
        other => other.into(),
    }
}

impl MonotoneOperator {
    pub fn identity(var: &str, env: &AssumptionEnv) -> MonotoneOperator {
        MonotoneOperator::single(var, Expr::Var, OpKind::StrictMonotone, env)
    }

    pub fn single(var: &str, body: Expr, kind: OpKind, env: &AssumptionEnv) -> MonotoneOperator {
        MonotoneOperator {
            var: var.to_string(),
            breakpoints: vec![],
            pieces: vec![OpPiece::Single { body, kind }],
            values: vec![],
            env: env.clone(),
            numeric: false,
        }
    }

    pub fn interval(&self, i: usize) -> (Bound, Bound) {
        interval_of(&self.breakpoints, i)
    }

    /// Value at a variable-free point, located under the assumptions.
    pub fn at_point(&self, x: &Expr) -> Result<SetValue> {
        Ok(match locate(&self.breakpoints, x, &self.env)? {
            Loc::At(i) => self.values[i].clone(),
            Loc::In(i) => match &self.pieces[i] {
                OpPiece::Single { body, .. } => SetValue::Point(simplify(&body.subst_var(x))),
                OpPiece::Empty => SetValue::Empty,
            },
        })
    }

    /// Numeric value at `x`: `None` when empty, else the end points.
    pub fn eval_f64(&self, x: f64, params: &ParamsF64) -> Result<Option<(f64, f64)>> {
        let bps: Vec<f64> = self.breakpoints.iter().map(|b| eval_f64(b, 0.0, params)).collect::<Result<_>>()?;
        match locate_f64(&bps, x) {
            Loc::At(i) => self.values[i].eval_f64(params),
            Loc::In(i) => match &self.pieces[i] {
                OpPiece::Single { body, .. } => {
                    let v = eval_f64(body, x, params)?;
                    Ok(Some((v, v)))
                }
                OpPiece::Empty => Ok(None),
            },
        }
    }

    pub fn breakpoints_f64(&self, params: &ParamsF64) -> Result<Vec<f64>> {
        self.breakpoints.iter().map(|b| eval_f64(b, 0.0, params)).collect()
    }

    /// True when no point has a nonempty value.
    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, OpPiece::Empty)) && self.values.iter().all(SetValue::is_empty)
    }

    /// Drop breakpoints across which nothing changes.
    pub fn normalized(mut self) -> Result<MonotoneOperator> {
        let mut i = 0;
        while i < self.breakpoints.len() {
            let same = match (&self.pieces[i], &self.pieces[i + 1], &self.values[i]) {
                (OpPiece::Empty, OpPiece::Empty, SetValue::Empty) => true,
                (OpPiece::Single { body: a, .. }, OpPiece::Single { body: b, .. }, SetValue::Point(v)) if a == b => {
                    let at = simplify(&a.subst_var(&self.breakpoints[i]));
                    compare_exprs(&at, v, &self.env)? == Cmp::Equal
                }
                _ => false,
            };
            if same {
                self.breakpoints.remove(i);
                self.values.remove(i);
                self.pieces.remove(i + 1);
            } else {
                i += 1;
            }
        }
        Ok(self)
    }

    /// Check piece kinds and monotonicity across breakpoints.
    pub fn check(&self) -> Result<()> {
        let env = &self.env;
        // Running upper end of everything to the left.
        let mut reach: Option<Bound> = None;
        let mut step = |lo: Bound, hi: Bound, at: String| -> Result<()> {
            if let Some(r) = &reach {
                if lo.cmp_strict(r, env)? == Ordering::Less {
                    return Err(Error::NotMonotone(format!("graph decreases near {at}")));
                }
            }
            reach = Some(hi);
            Ok(())
        };
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.interval(i);
            if let OpPiece::Single { body, kind } = &self.pieces[i] {
                match (trend(body, &lo, &hi, env), kind) {
                    (Ok(Trend::Constant), OpKind::Constant) | (Ok(Trend::Increasing), OpKind::StrictMonotone) => {}
                    (Err((a, b)), _) => return Err(Error::NotMonotone(format!("{body} decreases on ({a}, {b})"))),
                    _ => return Err(Error::Internal(format!("piece {i} has the wrong kind"))),
                }
                let l = end_limit(body, &lo, Side::Right, env)?;
                let h = end_limit(body, &hi, Side::Left, env)?;
                step(l, h, format!("piece {i}"))?;
            }
            if i < self.breakpoints.len() {
                if let Some((a, b)) = self.values[i].bounds() {
                    step(a, b, self.breakpoints[i].to_string())?;
                }
            }
        }
        Ok(())
    }
}

/// Kind of a single-valued body, or `NotMonotone`.
pub(crate) fn op_kind(body: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> Result<OpKind> {
    match trend(body, lo, hi, env) {
        Ok(Trend::Constant) => Ok(OpKind::Constant),
        Ok(Trend::Increasing) => Ok(OpKind::StrictMonotone),
        Err((a, b)) => Err(Error::NotMonotone(format!("{body} decreases on ({a}, {b})"))),
    }
}

/// Value of `T` at `x`.
pub fn eval_op(t: &MonotoneOperator, x: &ExtReal, params: &Params) -> Result<SetValue> {
    let n = match x {
        ExtReal::Finite(n) => n.clone(),
        _ => return Err(Error::Domain("operators are evaluated at finite points".into())),
    };
    for (i, b) in t.breakpoints.iter().enumerate() {
        let bv = eval(b, &ExtReal::Finite(Number::zero()), params)?;
        let bn = bv.finite().ok_or_else(|| Error::Internal("infinite breakpoint".into()))?.clone();
        match n.cmp_num(&bn) {
            Ordering::Less => return piece_value(&t.pieces[i], x, params),
            Ordering::Equal => return t.values[i].evaluated(params),
            Ordering::Greater => {}
        }
    }
    piece_value(&t.pieces[t.pieces.len() - 1], x, params)
}

fn piece_value(p: &OpPiece, x: &ExtReal, params: &Params) -> Result<SetValue> {
    match p {
        OpPiece::Empty => Ok(SetValue::Empty),
        OpPiece::Single { body, .. } => match eval(body, x, params)? {
            ExtReal::Finite(v) => Ok(SetValue::Point(Expr::Num(v))),
            _ => Ok(SetValue::Empty),
        },
    }
}

/// The subdifferential of a validated function.
pub fn subdifferential(f: &PiecewiseFunction) -> Result<MonotoneOperator> {
    let env = &f.env;
    let mut pieces = Vec::with_capacity(f.pieces.len());
    let mut derivs = Vec::with_capacity(f.pieces.len());
    for p in &f.pieces {
        if !p.is_finite() {
            pieces.push(OpPiece::Empty);
            derivs.push(None);
            continue;
        }
        let d = differentiate(&p.body)?;
        let kind = if d.has_var() { OpKind::StrictMonotone } else { OpKind::Constant };
        pieces.push(OpPiece::Single { body: d.clone(), kind });
        derivs.push(Some(d));
    }
    let mut values = Vec::with_capacity(f.breakpoints.len());
    for (i, b) in f.breakpoints.iter().enumerate() {
        if f.values[i].is_inf() {
            values.push(SetValue::Empty);
            continue;
        }
        let left = match &derivs[i] {
            Some(d) => Some(side_limit(d, b, Side::Left, env)?),
            None => None,
        };
        let right = match &derivs[i + 1] {
            Some(d) => Some(side_limit(d, b, Side::Right, env)?),
            None => None,
        };
        let v = match (left, right) {
            (Some(l), Some(r)) => SetValue::interval(l, r, env)?,
            // Left end of the domain: every slope up to the right derivative.
            (None, Some(r)) => SetValue::interval(Bound::NegInf, r, env)?,
            (Some(l), None) => SetValue::interval(l, Bound::PosInf, env)?,
            (None, None) => SetValue::All,
        };
        values.push(v);
    }
    Ok(MonotoneOperator {
        var: f.var.clone(),
        breakpoints: f.breakpoints.clone(),
        pieces,
        values,
        env: env.clone(),
        numeric: f.numeric,
    })
}

/// `lambda * T` for `lambda >= 0`; zero maps the domain to `{0}`.
pub fn scale(t: &MonotoneOperator, lambda: &Expr) -> Result<MonotoneOperator> {
    let env = &t.env;
    let zero = match compare_exprs(lambda, &Expr::int(0), env)? {
        Cmp::Less => return Err(Error::NegativeScalar(lambda.to_string())),
        Cmp::Undecidable => return Err(Error::UndecidableComparison(lambda.to_string(), "0".into())),
        Cmp::Equal => true,
        Cmp::Greater => false,
    };
    let mut out = t.clone();
    for p in &mut out.pieces {
        if let OpPiece::Single { body, kind } = p {
            if zero {
                *body = Expr::int(0);
                *kind = OpKind::Constant;
            } else {
                *body = simplify(&Expr::mul(lambda.clone(), body.clone()));
            }
        }
    }
    for v in &mut out.values {
        *v = match v.bounds() {
            None => SetValue::Empty,
            Some(_) if zero => SetValue::Point(Expr::int(0)),
            Some((a, b)) => SetValue::interval(bound_scale(&a, lambda), bound_scale(&b, lambda), env)?,
        };
    }
    Ok(out)
}

/// Pointwise Minkowski sum.
pub fn add(t1: &MonotoneOperator, t2: &MonotoneOperator) -> Result<MonotoneOperator> {
    let env = t1.env.union(&t2.env)?;
    let mut all = t1.breakpoints.clone();
    all.extend(t2.breakpoints.iter().cloned());
    let bps = sort_unique(all, &env)?;
    let piece_of = |t: &MonotoneOperator, k: usize| -> Result<OpPiece> {
        if k == 0 {
            return Ok(t.pieces[0].clone());
        }
        Ok(match locate(&t.breakpoints, &bps[k - 1], &env)? {
            Loc::At(i) => t.pieces[i + 1].clone(),
            Loc::In(i) => t.pieces[i].clone(),
        })
    };
    let mut pieces = Vec::with_capacity(bps.len() + 1);
    for k in 0..=bps.len() {
        pieces.push(match (piece_of(t1, k)?, piece_of(t2, k)?) {
            (OpPiece::Single { body: a, kind: ka }, OpPiece::Single { body: b, kind: kb }) => {
                let kind = if ka == OpKind::Constant && kb == OpKind::Constant {
                    OpKind::Constant
                } else {
                    OpKind::StrictMonotone
                };
                OpPiece::Single { body: simplify(&Expr::add(a, b)), kind }
            }
            _ => OpPiece::Empty,
        });
    }
    let mut values = Vec::with_capacity(bps.len());
    let (t1e, t2e) =
        (MonotoneOperator { env: env.clone(), ..t1.clone() }, MonotoneOperator { env: env.clone(), ..t2.clone() });
    for b in &bps {
        values.push(t1e.at_point(b)?.add(&t2e.at_point(b)?, &env)?);
    }
    MonotoneOperator { var: t1.var.clone(), breakpoints: bps, pieces, values, env, numeric: t1.numeric || t2.numeric }
        .normalized()
}

/// A point of the inverse graph: `y` and the hull of `x` values mapping to it.
struct YPoint {
    y: Expr,
    xs: SetValue,
}

/// An open `y` interval on which the inverse is single-valued.
struct YSeg {
    lo: Bound,
    hi: Bound,
    body: Expr,
    kind: OpKind,
}

/// Graph flip.
pub fn invert(t: &MonotoneOperator) -> Result<MonotoneOperator> {
    let env = &t.env;
    let mut points: Vec<YPoint> = Vec::new();
    let mut segs: Vec<YSeg> = Vec::new();
    let mut numeric = t.numeric;
    for (i, p) in t.pieces.iter().enumerate() {
        let (lo, hi) = t.interval(i);
        match p {
            OpPiece::Empty => {}
            OpPiece::Single { body, kind: OpKind::Constant } => {
                points.push(YPoint { y: simplify(body), xs: SetValue::interval(lo, hi, env)? });
            }
            OpPiece::Single { body, kind: OpKind::StrictMonotone } => {
                let inv = invert_monotone(body, &lo, &hi, env)?;
                numeric |= !inv.is_symbolic();
                let (ylo, yhi) = inv.image();
                for end in [ylo, yhi] {
                    if let Bound::Finite(y) = end {
                        points.push(YPoint { y: y.clone(), xs: SetValue::Empty });
                    }
                }
                segs.push(YSeg {
                    lo: ylo.clone(),
                    hi: yhi.clone(),
                    body: inv.inverse().clone(),
                    kind: OpKind::StrictMonotone,
                });
            }
        }
    }
    for (i, v) in t.values.iter().enumerate() {
        let b = &t.breakpoints[i];
        let at = SetValue::Point(b.clone());
        match v {
            SetValue::Empty => {}
            SetValue::Point(y) => points.push(YPoint { y: y.clone(), xs: at }),
            SetValue::Interval(..) | SetValue::All => {
                let (l, u) = v.bounds().unwrap();
                let (l, u) = (&l, &u);
                for end in [l, u] {
                    if let Bound::Finite(y) = end {
                        points.push(YPoint { y: y.clone(), xs: at.clone() });
                    }
                }
                segs.push(YSeg { lo: l.clone(), hi: u.clone(), body: b.clone(), kind: OpKind::Constant });
            }
        }
    }
    let ys = sort_unique(points.iter().map(|p| p.y.clone()).collect(), env)?;
    let mut values = vec![SetValue::Empty; ys.len()];
    for p in &points {
        let Loc::At(k) = locate(&ys, &p.y, env)? else {
            return Err(Error::Internal("lost an inverse breakpoint".into()));
        };
        values[k] = values[k].hull(&p.xs, env)?;
    }
    let mut pieces = Vec::with_capacity(ys.len() + 1);
    for k in 0..=ys.len() {
        let (glo, ghi) = interval_of(&ys, k);
        let mut found: Option<&YSeg> = None;
        for s in &segs {
            let covers =
                s.lo.cmp_strict(&glo, env)? != Ordering::Greater && s.hi.cmp_strict(&ghi, env)? != Ordering::Less;
            if covers {
                if found.is_some() {
                    return Err(Error::NotMonotone(format!("two branches over ({}, {})", glo.text(), ghi.text())));
                }
                found = Some(s);
            }
        }
        pieces.push(match found {
            Some(s) => OpPiece::Single { body: s.body.clone(), kind: s.kind },
            None => OpPiece::Empty,
        });
    }
    MonotoneOperator { var: dual_var(&t.var), breakpoints: ys, pieces, values, env: env.clone(), numeric }.normalized()
}

/// `(I + lambda T)^{-1}`.
pub fn resolvent(t: &MonotoneOperator, lambda: &Expr) -> Result<MonotoneOperator> {
    match compare_exprs(lambda, &Expr::int(0), &t.env)? {
        Cmp::Greater => {}
        Cmp::Undecidable => return Err(Error::UndecidableComparison(lambda.to_string(), "0".into())),
        _ => return Err(Error::NegativeScalar(lambda.to_string())),
    }
    let id = MonotoneOperator::identity(&t.var, &t.env);
    let r = invert(&add(&id, &scale(t, lambda)?)?)?;
    for v in &r.values {
        if matches!(v, SetValue::Interval(..) | SetValue::All) {
            return Err(Error::NotMonotone(format!("resolvent is multivalued ({v})")));
        }
    }
    Ok(r)
}

/// Proximity operator of `f` with step `lambda`.
pub fn prox(f: &PiecewiseFunction, lambda: &Expr) -> Result<MonotoneOperator> {
    resolvent(&subdifferential(f)?, lambda)
}

/// Maximal monotone extension: integrate a selection, then differentiate.
pub fn maximal_extension(t: &MonotoneOperator) -> Result<MonotoneOperator> {
    let anchor = conv::domain_point(t)?;
    let h = conv::integ(t, &anchor, &Expr::int(0))?;
    subdifferential(&h)
}

#[derive(Clone, Debug)]
enum RawSet {
    Exprs(Vec<Expr>),
    Range(Option<Expr>, Option<Expr>),
    All,
    Empty,
}

fn parse_set(p: &mut Parser) -> Result<RawSet> {
    if p.at_ident("all") {
        p.bump();
        return Ok(RawSet::All);
    }
    if p.at_ident("empty") {
        p.bump();
        return Ok(RawSet::Empty);
    }
    if p.eat("{") {
        let mut v = vec![p.expr()?];
        while p.eat(",") {
            v.push(p.expr()?);
        }
        p.expect("}")?;
        return Ok(RawSet::Exprs(v));
    }
    if p.eat("[") {
        let lo = if p.at_sym("-") && matches!(p.peek_at(1), Tok::Ident(s) if s == "inf") {
            p.bump();
            p.bump();
            None
        } else {
            Some(p.expr()?)
        };
        p.expect(",")?;
        let hi = if p.at_ident("inf") {
            p.bump();
            None
        } else {
            Some(p.expr()?)
        };
        p.expect("]")?;
        return Ok(RawSet::Range(lo, hi));
    }
    Err(p.error(&["{", "[", "all", "empty"]))
}

/// Parse `sd{ guard -> setval ; ... }` or a bare `{expr}`.
pub fn parse_op(text: &str, env: &AssumptionEnv) -> Result<MonotoneOperator> {
    parse_op_in(text, "x", env)
}

pub fn parse_op_in(text: &str, var: &str, env: &AssumptionEnv) -> Result<MonotoneOperator> {
    let mut p = Parser::new(text, var)?;
    let (bps, raw_pieces, points): (Vec<Expr>, Vec<RawSet>, Vec<Result<SetValue>>) = if p.at_ident("sd") {
        let branches: Vec<Branch<RawSet>> = parse_branches(&mut p, "sd", env, &mut |p, _: &Guard| parse_set(p))?;
        let l = layout(&branches, env)?;
        let raw: Vec<RawSet> = l.pieces.iter().map(|&k| branches[k].rhs.clone()).collect();
        let mut pts = Vec::new();
        for (i, owner) in l.points.iter().enumerate() {
            let b = &l.breakpoints[i];
            pts.push(match *owner {
                PointOwner::Point(k) => point_set(&branches[k].rhs, b, env),
                PointOwner::Left(k) => end_set(&branches[k].rhs, b, Side::Left, env),
                PointOwner::Right(k) => end_set(&branches[k].rhs, b, Side::Right, env),
            });
        }
        (l.breakpoints, raw, pts)
    } else {
        let s = parse_set(&mut p)?;
        p.expect_end()?;
        (vec![], vec![s], vec![])
    };
    let mut pieces = Vec::with_capacity(raw_pieces.len());
    for (i, r) in raw_pieces.iter().enumerate() {
        let (lo, hi) = interval_of(&bps, i);
        pieces.push(match r {
            RawSet::Empty => OpPiece::Empty,
            RawSet::Exprs(v) if v.len() == 1 => {
                let body = simplify(&v[0]);
                OpPiece::Single { kind: op_kind(&body, &lo, &hi, env)?, body }
            }
            other => {
                return Err(Error::Unsupported(format!("multivalued piece {other:?} on an interval")));
            }
        });
    }
    let values = points.into_iter().collect::<Result<Vec<_>>>()?;
    let t =
        MonotoneOperator { var: var.to_string(), breakpoints: bps, pieces, values, env: env.clone(), numeric: false };
    t.check()?;
    Ok(t)
}

fn point_set(r: &RawSet, b: &Expr, env: &AssumptionEnv) -> Result<SetValue> {
    let at = |e: &Expr| simplify(&e.subst_var(b));
    match r {
        RawSet::Empty => Ok(SetValue::Empty),
        RawSet::All => Ok(SetValue::All),
        RawSet::Exprs(v) => {
            // Finite sets are replaced by their hull.
            let mut s = SetValue::Empty;
            for e in v {
                s = s.hull(&SetValue::Point(at(e)), env)?;
            }
            Ok(s)
        }
        RawSet::Range(lo, hi) => SetValue::interval(
            lo.as_ref().map_or(Bound::NegInf, |e| Bound::Finite(at(e))),
            hi.as_ref().map_or(Bound::PosInf, |e| Bound::Finite(at(e))),
            env,
        ),
    }
}

fn end_set(r: &RawSet, b: &Expr, side: Side, env: &AssumptionEnv) -> Result<SetValue> {
    match r {
        RawSet::Exprs(v) if v.len() == 1 => match side_limit(&v[0], b, side, env)? {
            Bound::Finite(e) => Ok(SetValue::Point(e)),
            _ => Ok(SetValue::Empty),
        },
        RawSet::Empty => Ok(SetValue::Empty),
        _ => Err(Error::Unsupported("multivalued piece on an interval".into())),
    }
}

impl fmt::Display for MonotoneOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = &self.var;
        let piece = |i: usize| match &self.pieces[i] {
            OpPiece::Single { body, .. } => format!("{{{}}}", body.display(var)),
            OpPiece::Empty => "empty".into(),
        };
        let rows = rows(var, &self.breakpoints, piece, |i| self.values[i].text());
        write_rows(f, "sd", &rows)
    }
}
