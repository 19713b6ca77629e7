//! Integration of monotone operators and convex conjugation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{antiderivative, simplify, Bound, Expr, NumericIntegral};
use crate::monop::{invert, subdifferential, MonotoneOperator, OpPiece, SetValue};
use crate::piece::{locate, resolve_abs, side_limit, Loc, Side};
use crate::pwf::{classify, Piece, PiecewiseFunction};

/// A point strictly inside `(lo, hi)`.
pub(crate) fn interior_point(lo: &Bound, hi: &Bound) -> Expr {
    match (lo, hi) {
        (Bound::Finite(a), Bound::Finite(b)) => simplify(&Expr::div(Expr::add(a.clone(), b.clone()), Expr::int(2))),
        (Bound::Finite(a), _) => simplify(&Expr::add(a.clone(), Expr::int(1))),
        (_, Bound::Finite(b)) => simplify(&Expr::sub(b.clone(), Expr::int(1))),
        _ => Expr::int(0),
    }
}

/// A point where `t` is nonempty, preferring the origin.
pub fn domain_point(t: &MonotoneOperator) -> Result<Expr> {
    if !t.at_point(&Expr::int(0))?.is_empty() {
        return Ok(Expr::int(0));
    }
    for i in 0..t.pieces.len() {
        if let OpPiece::Single { .. } = t.pieces[i] {
            let (lo, hi) = t.interval(i);
            return Ok(interior_point(&lo, &hi));
        }
    }
    for (i, v) in t.values.iter().enumerate() {
        if !v.is_empty() {
            return Ok(t.breakpoints[i].clone());
        }
    }
    Err(Error::EmptyOperator)
}

/// Index range of the elements (piece `i` is `2i`, breakpoint `i` is
/// `2i + 1`) between the first and last nonempty ones.
fn hull_span(t: &MonotoneOperator) -> Option<(usize, usize)> {
    let nonempty = |k: usize| {
        if k.is_multiple_of(2) {
            !matches!(t.pieces[k / 2], OpPiece::Empty)
        } else {
            !t.values[k / 2].is_empty()
        }
    };
    let n = 2 * t.pieces.len() - 1;
    let first = (0..n).find(|&k| nonempty(k))?;
    let last = (0..n).rev().find(|&k| nonempty(k))?;
    Some((first, last))
}

/// Slope used across a gap in the domain: any value between the neighbours.
fn gap_slope(t: &MonotoneOperator, i: usize) -> Result<Expr> {
    let env = &t.env;
    for k in (0..i).rev() {
        if let Some((_, hi)) = t.values[k].bounds() {
            if let Bound::Finite(e) = hi {
                return Ok(e);
            }
            break;
        }
        if let OpPiece::Single { body, .. } = &t.pieces[k] {
            if let Bound::Finite(e) = side_limit(body, &t.breakpoints[k], Side::Left, env)? {
                return Ok(e);
            }
            break;
        }
    }
    for k in i..t.values.len() {
        if let Some((Bound::Finite(e), _)) = t.values[k].bounds() {
            return Ok(e);
        }
        if let OpPiece::Single { body, .. } = &t.pieces[k + 1] {
            if let Bound::Finite(e) = side_limit(body, &t.breakpoints[k], Side::Right, env)? {
                return Ok(e);
            }
        }
    }
    Ok(Expr::int(0))
}

/// An antiderivative of `g`, falling back to quadrature from `from`.
fn primitive(g: &Expr, from: &Expr) -> Result<(Expr, bool)> {
    match antiderivative(g) {
        Ok(p) => Ok((simplify(&p), false)),
        Err(Error::NonElementary(_)) => Ok((
            Expr::Integral(Arc::new(NumericIntegral { integrand: g.clone(), from: from.clone() }), Box::new(Expr::Var)),
            true,
        )),
        Err(e) => Err(e),
    }
}

fn finite_or(b: Bound) -> Result<Expr> {
    match b {
        Bound::Finite(e) => Ok(e),
        _ => Err(Error::ConstantPinFailure),
    }
}

/// Convex `F` with `dF` containing `t` and `F(anchor) = value`.
pub fn integ(t: &MonotoneOperator, anchor: &Expr, value: &Expr) -> Result<PiecewiseFunction> {
    let env = &t.env;
    let (first, last) = hull_span(t).ok_or(Error::EmptyOperator)?;
    let inside = |k: usize| first <= k && k <= last;
    let n = t.pieces.len();
    let mut numeric = t.numeric;
    // Primitives without constants; `None` outside the domain.
    let mut prims: Vec<Option<Expr>> = Vec::with_capacity(n);
    for i in 0..n {
        if !inside(2 * i) {
            prims.push(None);
            continue;
        }
        let (lo, hi) = t.interval(i);
        let g = match &t.pieces[i] {
            OpPiece::Single { body, .. } => body.clone(),
            OpPiece::Empty => gap_slope(t, i)?,
        };
        let (p, num) = primitive(&g, &interior_point(&lo, &hi))?;
        numeric |= num;
        prims.push(Some(resolve_abs(&p, &lo, &hi, env)));
    }
    // Constants, pinned at the anchor and carried across breakpoints.
    let mut consts: Vec<Option<Expr>> = vec![None; n];
    let mut point_value: Option<(usize, Expr)> = None;
    let start = match locate(&t.breakpoints, anchor, env)? {
        Loc::In(i) => {
            let p = prims[i].as_ref().ok_or_else(|| Error::Domain(format!("anchor {anchor} outside the domain")))?;
            consts[i] = Some(simplify(&Expr::sub(value.clone(), p.subst_var(anchor))));
            i
        }
        Loc::At(i) => {
            let side = [(i + 1, Side::Right), (i, Side::Left)].into_iter().find(|&(j, _)| prims[j].is_some());
            match side {
                Some((j, s)) => {
                    let at = finite_or(side_limit(prims[j].as_ref().unwrap(), anchor, s, env)?)?;
                    consts[j] = Some(simplify(&Expr::sub(value.clone(), at)));
                    j
                }
                None => {
                    if !inside(2 * i + 1) {
                        return Err(Error::Domain(format!("anchor {anchor} outside the domain")));
                    }
                    point_value = Some((i, value.clone()));
                    i
                }
            }
        }
    };
    if point_value.is_none() {
        let carry = |j_from: usize, j_to: usize, b: &Expr, consts: &mut Vec<Option<Expr>>| -> Result<bool> {
            let (Some(pf), Some(pt)) = (&prims[j_from], &prims[j_to]) else { return Ok(false) };
            let (sf, st) = if j_to > j_from { (Side::Left, Side::Right) } else { (Side::Right, Side::Left) };
            let lf = finite_or(side_limit(pf, b, sf, env)?)?;
            let lt = finite_or(side_limit(pt, b, st, env)?)?;
            let c = consts[j_from].clone().unwrap();
            consts[j_to] = Some(simplify(&Expr::add(c, Expr::sub(lf, lt))));
            Ok(true)
        };
        for j in start..n - 1 {
            if !carry(j, j + 1, &t.breakpoints[j], &mut consts)? {
                break;
            }
        }
        for j in (1..=start).rev() {
            if !carry(j, j - 1, &t.breakpoints[j - 1], &mut consts)? {
                break;
            }
        }
    }
    let mut pieces = Vec::with_capacity(n);
    for i in 0..n {
        match (&prims[i], &consts[i]) {
            (Some(p), Some(c)) => {
                let body = simplify(&Expr::add(p.clone(), c.clone()));
                let (lo, hi) = t.interval(i);
                let kind = classify(&body, &lo, &hi, env)?;
                pieces.push(Piece { body, kind });
            }
            _ => pieces.push(Piece::infinite()),
        }
    }
    let mut values = Vec::with_capacity(t.breakpoints.len());
    for (i, b) in t.breakpoints.iter().enumerate() {
        if let Some((k, v)) = &point_value {
            values.push(if *k == i { v.clone() } else { Expr::Inf });
            continue;
        }
        let from = if pieces[i].is_finite() {
            Some((i, Side::Left))
        } else if pieces[i + 1].is_finite() {
            Some((i + 1, Side::Right))
        } else {
            None
        };
        values.push(match from {
            Some((j, s)) => match side_limit(&pieces[j].body, b, s, env)? {
                Bound::Finite(e) => e,
                Bound::PosInf => Expr::Inf,
                Bound::NegInf => return Err(Error::Internal(format!("integral tends to -inf at {b}"))),
            },
            None => Expr::Inf,
        });
    }
    Ok(PiecewiseFunction {
        var: t.var.clone(),
        breakpoints: t.breakpoints.clone(),
        pieces,
        values,
        env: env.clone(),
        numeric,
        weakly_convex: false,
    })
}

/// A pair `(x0, y0)` with `y0` in `df(x0)`, plus `f(x0)`.
fn touching_pair(f: &PiecewiseFunction, df: &MonotoneOperator) -> Result<(Expr, Expr, Expr)> {
    let cands: Vec<usize> = (0..df.values.len()).filter(|&i| !df.values[i].is_empty()).collect();
    if !cands.is_empty() {
        let i = cands[cands.len() / 2];
        let y0 = match &df.values[i] {
            SetValue::Point(v) => v.clone(),
            SetValue::Interval(Bound::Finite(l), _) => l.clone(),
            SetValue::Interval(_, Bound::Finite(u)) => u.clone(),
            _ => Expr::int(0),
        };
        return Ok((f.breakpoints[i].clone(), y0, f.values[i].clone()));
    }
    for (i, p) in df.pieces.iter().enumerate() {
        if let OpPiece::Single { body, .. } = p {
            let (lo, hi) = df.interval(i);
            let x0 = interior_point(&lo, &hi);
            let y0 = simplify(&body.subst_var(&x0));
            let fx = simplify(&f.pieces[i].body.subst_var(&x0));
            return Ok((x0, y0, fx));
        }
    }
    Err(Error::EmptyOperator)
}

/// Convex conjugate, computed by inverting the subdifferential and
/// integrating; the constant comes from equality in Fenchel-Young.
pub fn conjugate(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    if f.is_everywhere_infinite() {
        return Err(Error::EmptyOperator);
    }
    let df = subdifferential(f)?;
    let inv = invert(&df)?;
    let (x0, y0, fx0) = touching_pair(f, &df)?;
    let value = simplify(&Expr::sub(Expr::mul(x0, y0.clone()), fx0));
    integ(&inv, &y0, &value)
}

pub fn biconjugate(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    conjugate(&conjugate(f)?)
}
