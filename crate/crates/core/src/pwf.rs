//! Piecewise convex functions on the line.
//!
//! A [`PiecewiseFunction`] stores finitely many increasing breakpoints, one
//! body per open interval between them, and an explicit value at every
//! breakpoint. Bodies are affine, strictly convex, or `+inf`.

use std::cmp::Ordering;
use std::fmt;

use crate::dsl::{layout, parse_branches, Branch, PointOwner};
use crate::env::{AssumptionEnv, Cmp};
use crate::error::{Error, Result};
use crate::expr::{compare_exprs, differentiate, eval, eval_f64, simplify, Bound, Expr, Params, ParamsF64, Parser};
use crate::number::{ExtReal, Number};
use crate::piece::{interval_of, locate_f64, side_limit, split_abs, trend, witness, Loc, Side, Trend};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PieceKind {
    Affine,
    StrictlyConvex,
    Infinite,
}

impl PieceKind {
    pub fn name(self) -> &'static str {
        match self {
            PieceKind::Affine => "affine",
            PieceKind::StrictlyConvex => "strictly-convex",
            PieceKind::Infinite => "infinite",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    /// `Expr::Inf` exactly when the kind is `Infinite`.
    pub body: Expr,
    pub kind: PieceKind,
}

impl Piece {
    pub fn infinite() -> Piece {
        Piece { body: Expr::Inf, kind: PieceKind::Infinite }
    }

    pub fn is_finite(&self) -> bool {
        self.kind != PieceKind::Infinite
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction {
    /// Display name of the variable.
    pub var: String,
    pub breakpoints: Vec<Expr>,
    pub pieces: Vec<Piece>,
    /// Value at each breakpoint; `Expr::Inf` outside the domain.
    pub values: Vec<Expr>,
    pub env: AssumptionEnv,
    /// Some piece is evaluated by quadrature or root finding.
    pub numeric: bool,
    /// Only `f + x^2/2` is convex (penalty functions). Piece kinds then
    /// describe `f + x^2/2`.
    pub weakly_convex: bool,
}

/// Outcome of [`PiecewiseFunction::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub kinds: Vec<PieceKind>,
    /// Human-readable list of the checks that ran.
    pub checks: Vec<String>,
    pub everywhere_infinite: bool,
}

/// Effective domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Empty,
    Interval { lo: Bound, lo_closed: bool, hi: Bound, hi_closed: bool },
}

impl PiecewiseFunction {
    /// One body on the whole line (no validation).
    pub fn single(var: &str, body: Expr, kind: PieceKind, env: AssumptionEnv) -> PiecewiseFunction {
        PiecewiseFunction {
            var: var.to_string(),
            breakpoints: vec![],
            pieces: vec![Piece { body, kind }],
            values: vec![],
            env,
            numeric: false,
            weakly_convex: false,
        }
    }

    pub fn interval(&self, i: usize) -> (Bound, Bound) {
        interval_of(&self.breakpoints, i)
    }

    pub fn is_everywhere_infinite(&self) -> bool {
        self.pieces.iter().all(|p| !p.is_finite()) && self.values.iter().all(Expr::is_inf)
    }

    /// Value at a point of the extended line.
    pub fn eval(&self, x: &ExtReal, params: &Params) -> Result<ExtReal> {
        match x {
            ExtReal::Finite(n) => {
                for (i, b) in self.breakpoints.iter().enumerate() {
                    let bv = eval(b, &ExtReal::Finite(Number::zero()), params)?;
                    let bn = bv.finite().ok_or_else(|| Error::Internal("infinite breakpoint".into()))?;
                    match n.cmp_num(bn) {
                        Ordering::Less => return eval(&self.pieces[i].body, x, params),
                        Ordering::Equal => {
                            return eval(&self.values[i], &ExtReal::Finite(Number::zero()), params);
                        }
                        Ordering::Greater => {}
                    }
                }
                eval(&self.pieces[self.pieces.len() - 1].body, x, params)
            }
            ExtReal::PosInf => eval(&self.pieces[self.pieces.len() - 1].body, x, params),
            ExtReal::NegInf => eval(&self.pieces[0].body, x, params),
        }
    }

    /// Floating-point value; `+inf` outside the domain.
    pub fn eval_f64(&self, x: f64, params: &ParamsF64) -> Result<f64> {
        let bps = self.breakpoints_f64(params)?;
        match locate_f64(&bps, x) {
            Loc::At(i) => value_f64(&self.values[i], 0.0, params),
            Loc::In(i) => value_f64(&self.pieces[i].body, x, params),
        }
    }

    pub fn breakpoints_f64(&self, params: &ParamsF64) -> Result<Vec<f64>> {
        self.breakpoints.iter().map(|b| eval_f64(b, 0.0, params)).collect()
    }

    /// The interval where the function is finite.
    pub fn domain(&self) -> Domain {
        let finite_piece: Vec<usize> = (0..self.pieces.len()).filter(|&i| self.pieces[i].is_finite()).collect();
        let finite_point: Vec<usize> = (0..self.values.len()).filter(|&i| !self.values[i].is_inf()).collect();
        if finite_piece.is_empty() {
            return match finite_point.first() {
                None => Domain::Empty,
                Some(&i) => {
                    let b = Bound::Finite(self.breakpoints[i].clone());
                    Domain::Interval { lo: b.clone(), lo_closed: true, hi: b, hi_closed: true }
                }
            };
        }
        let first = finite_piece[0];
        let last = *finite_piece.last().unwrap();
        let (lo, _) = self.interval(first);
        let (_, hi) = self.interval(last);
        let lo_closed = first > 0 && !self.values[first - 1].is_inf();
        let hi_closed = last < self.breakpoints.len() && !self.values[last].is_inf();
        Domain::Interval { lo, lo_closed, hi, hi_closed }
    }

    /// Check the defining conditions and (re)assign piece kinds.
    pub fn validate(&self) -> Result<ClassificationReport> {
        if self.weakly_convex {
            let mut g = self.add_quadratic(&Number::one());
            g.weakly_convex = false;
            return g.validate();
        }
        let env = &self.env;
        let mut checks = Vec::new();
        if self.pieces.len() != self.breakpoints.len() + 1 || self.values.len() != self.breakpoints.len() {
            return Err(Error::Internal("piece and breakpoint counts disagree".into()));
        }
        for w in self.breakpoints.windows(2) {
            match compare_exprs(&w[0], &w[1], env)? {
                Cmp::Less => {}
                Cmp::Undecidable => return Err(Error::UndecidableComparison(w[0].to_string(), w[1].to_string())),
                _ => return Err(Error::Internal(format!("breakpoints {} and {} out of order", w[0], w[1]))),
            }
        }
        checks.push("breakpoints strictly increasing".to_string());
        if self.is_everywhere_infinite() {
            checks.push("everywhere infinite".to_string());
            return Ok(ClassificationReport {
                kinds: self.pieces.iter().map(|p| p.kind).collect(),
                checks,
                everywhere_infinite: true,
            });
        }
        // The domain must be an interval.
        let finite: Vec<bool> = self.pieces.iter().map(Piece::is_finite).collect();
        if let (Some(a), Some(b)) = (finite.iter().position(|&f| f), finite.iter().rposition(|&f| f)) {
            for (i, &fin) in finite.iter().enumerate().take(b + 1).skip(a) {
                if !fin {
                    return Err(Error::NonConvex(format!("infinite piece {i} inside the domain")));
                }
                if i < b && self.values[i].is_inf() {
                    return Err(Error::NonConvex(format!(
                        "infinite value at {} inside the domain",
                        self.breakpoints[i]
                    )));
                }
            }
        } else {
            let pts = self.values.iter().filter(|v| !v.is_inf()).count();
            if pts > 1 {
                return Err(Error::NonConvex("isolated finite points".into()));
            }
        }
        let mut kinds = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            if !p.is_finite() {
                kinds.push(PieceKind::Infinite);
                continue;
            }
            let (lo, hi) = self.interval(i);
            let k = classify(&p.body, &lo, &hi, env)?;
            checks.push(format!("piece {i} is {}", k.name()));
            kinds.push(k);
        }
        for (i, b) in self.breakpoints.iter().enumerate() {
            let (l, r) = (&self.pieces[i], &self.pieces[i + 1]);
            let v = &self.values[i];
            let at = b.to_string();
            let sides = [(l, Side::Left), (r, Side::Right)];
            if v.is_inf() {
                for (p, side) in sides {
                    if p.is_finite() && side_limit(&p.body, b, side, env)?.is_finite() {
                        return Err(Error::NotLsc(at));
                    }
                }
                continue;
            }
            for (p, side) in sides {
                if !p.is_finite() {
                    continue;
                }
                match side_limit(&p.body, b, side, env)? {
                    Bound::Finite(lim) => match compare_exprs(&lim, v, env)? {
                        Cmp::Equal => {}
                        Cmp::Undecidable => return Err(Error::UndecidableComparison(lim.to_string(), v.to_string())),
                        _ => return Err(Error::DiscontinuousOnDomain(at)),
                    },
                    _ => return Err(Error::DiscontinuousOnDomain(at)),
                }
            }
            checks.push(format!("continuous at {at}"));
            if l.is_finite() && r.is_finite() {
                let dl = side_limit(&differentiate(&l.body)?, b, Side::Left, env)?;
                let dr = side_limit(&differentiate(&r.body)?, b, Side::Right, env)?;
                if dl.cmp_strict(&dr, env)? == Ordering::Greater {
                    return Err(Error::NonConvex(self.kink_witness(i)));
                }
                checks.push(format!("slopes ordered at {at}"));
            }
        }
        Ok(ClassificationReport { kinds, checks, everywhere_infinite: false })
    }

    fn kink_witness(&self, i: usize) -> String {
        let w = witness(&self.env, self.breakpoints.iter());
        let b = eval_f64(&self.breakpoints[i], 0.0, &w).unwrap_or(f64::NAN);
        let h = 1e-3;
        format!("({}, {}, {})", b - h, b, b + h)
    }

    /// Validate and store the sampled kinds.
    pub fn validated(mut self) -> Result<PiecewiseFunction> {
        let rep = self.validate()?;
        for (p, k) in self.pieces.iter_mut().zip(rep.kinds) {
            p.kind = k;
        }
        Ok(self)
    }

    /// `f + c x^2/2` on the domain, `+inf` elsewhere.
    pub fn add_quadratic(&self, c: &Number) -> PiecewiseFunction {
        let q = Expr::mul(Expr::Num(c.clone()), Expr::div(Expr::powi(Expr::Var, 2), Expr::int(2)));
        let mut g = self.clone();
        for p in &mut g.pieces {
            if p.is_finite() {
                p.body = simplify(&Expr::add(p.body.clone(), q.clone()));
            }
        }
        for (v, b) in g.values.iter_mut().zip(&self.breakpoints) {
            if !v.is_inf() {
                *v = simplify(&Expr::add(v.clone(), q.subst_var(b)));
            }
        }
        g
    }

    /// `f + c`.
    pub fn shift(&self, c: &Expr) -> PiecewiseFunction {
        let mut g = self.clone();
        for p in &mut g.pieces {
            if p.is_finite() {
                p.body = simplify(&Expr::add(p.body.clone(), c.clone()));
            }
        }
        for v in &mut g.values {
            if !v.is_inf() {
                *v = simplify(&Expr::add(v.clone(), c.clone()));
            }
        }
        g
    }

    /// Bind parameters to numbers.
    pub fn bind(&self, params: &Params) -> PiecewiseFunction {
        let mut g = self.clone();
        g.breakpoints = g.breakpoints.iter().map(|b| simplify(&b.subst_params(params))).collect();
        for p in &mut g.pieces {
            if p.is_finite() {
                p.body = simplify(&p.body.subst_params(params));
            }
        }
        for v in &mut g.values {
            if !v.is_inf() {
                *v = simplify(&v.subst_params(params));
            }
        }
        g
    }
}

fn value_f64(e: &Expr, x: f64, params: &ParamsF64) -> Result<f64> {
    if e.is_inf() {
        Ok(f64::INFINITY)
    } else {
        eval_f64(e, x, params)
    }
}

/// Kind of a finite body on `(lo, hi)`, or `NonConvex` with a witness.
pub(crate) fn classify(body: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> Result<PieceKind> {
    let d = differentiate(body)?;
    match trend(&d, lo, hi, env) {
        Ok(Trend::Constant) => Ok(PieceKind::Affine),
        Ok(Trend::Increasing) => Ok(PieceKind::StrictlyConvex),
        Err((a, b)) => Err(Error::NonConvex(midpoint_witness(body, (lo, hi), a, b, env))),
    }
}

/// A triple `(a, m, b)` with `f(m) > (f(a) + f(b))/2`. Unit-spaced triples
/// beside a finite end of the piece are tried first, then scaled copies of
/// the failing sample interval `[a, b]`; the bare interval if none is found.
fn midpoint_witness(body: &Expr, piece: (&Bound, &Bound), a: f64, b: f64, env: &AssumptionEnv) -> String {
    let w = witness(env, [body]);
    let f = |x: f64| eval_f64(body, x, &w).unwrap_or(f64::NAN);
    let end = |bd: &Bound| bd.eval_f64(&w).ok().filter(|v| v.is_finite());
    let (plo, phi) = (end(piece.0), end(piece.1));
    let inside = |x: f64| plo.is_none_or(|l| x > l) && phi.is_none_or(|h| x < h);
    let mut triples = Vec::new();
    if let Some(h) = phi {
        triples.push((h - 2.0, h - 1.0, h));
    }
    if let Some(l) = plo {
        triples.push((l, l + 1.0, l + 2.0));
    }
    let m = 0.5 * (a + b);
    triples.extend([1.0, 2.0, 4.0, 0.5].map(|s| (m - s * (m - a), m, m + s * (b - m))));
    for (lo, mid, hi) in triples {
        // Ends may sit on the closure of the piece; the midpoint may not.
        if inside(mid) && f(mid) > 0.5 * (f(lo) + f(hi)) {
            return format!("({lo}, {mid}, {hi})");
        }
    }
    format!("({a}, {m}, {b})")
}

/// Parse a function: `pw{ guard -> body ; ... }` or a bare expression.
pub fn parse_pwf(text: &str, env: &AssumptionEnv) -> Result<PiecewiseFunction> {
    parse_pwf_in(text, "x", env)
}

/// [`parse_pwf`] with a chosen variable name.
pub fn parse_pwf_in(text: &str, var: &str, env: &AssumptionEnv) -> Result<PiecewiseFunction> {
    parse_pwf_raw(text, var, env)?.validated()
}

/// Parse without any convexity or continuity checks.
pub(crate) fn parse_pwf_raw(text: &str, var: &str, env: &AssumptionEnv) -> Result<PiecewiseFunction> {
    let mut p = Parser::new(text, var)?;
    let (bps, bodies, values) = if p.at_ident("pw") && matches!(p.peek_at(1), crate::expr::Tok::Sym("{")) {
        let branches: Vec<Branch<Expr>> = parse_branches(&mut p, "pw", env, &mut |p, _| body(p))?;
        let l = layout(&branches, env)?;
        let bodies: Vec<Expr> = l.pieces.iter().map(|&k| branches[k].rhs.clone()).collect();
        let mut values = Vec::new();
        for (i, owner) in l.points.iter().enumerate() {
            let b = &l.breakpoints[i];
            let v = match *owner {
                PointOwner::Point(k) => point_value(&branches[k].rhs, b)?,
                PointOwner::Left(k) => limit_value(&branches[k].rhs, b, Side::Left, env)?,
                PointOwner::Right(k) => limit_value(&branches[k].rhs, b, Side::Right, env)?,
            };
            values.push(v);
        }
        (l.breakpoints, bodies, values)
    } else {
        let e = body(&mut p)?;
        p.expect_end()?;
        (vec![], vec![e], vec![])
    };
    // Remove abs by splitting at kinks; new breakpoints take the continuous value.
    let mut breakpoints = Vec::new();
    let mut pieces = Vec::new();
    let mut vals = Vec::new();
    for (i, body) in bodies.iter().enumerate() {
        let (lo, hi) = interval_of(&bps, i);
        if body.is_inf() {
            pieces.push(Piece::infinite());
        } else {
            let s = split_abs(body, &lo, &hi, env)?;
            for (j, bj) in s.bodies.iter().enumerate() {
                if j > 0 {
                    let k = &s.breakpoints[j - 1];
                    breakpoints.push(k.clone());
                    vals.push(limit_value(bj, k, Side::Right, env)?);
                }
                pieces.push(Piece { body: simplify(bj), kind: PieceKind::Affine });
            }
        }
        if i < bps.len() {
            breakpoints.push(bps[i].clone());
            vals.push(values[i].clone());
        }
    }
    Ok(PiecewiseFunction {
        var: var.to_string(),
        breakpoints,
        pieces,
        values: vals,
        env: env.clone(),
        numeric: false,
        weakly_convex: false,
    })
}

fn body(p: &mut Parser) -> Result<Expr> {
    if p.at_ident("inf") {
        p.bump();
        return Ok(Expr::Inf);
    }
    p.expr()
}

fn point_value(body: &Expr, b: &Expr) -> Result<Expr> {
    if body.is_inf() {
        return Ok(Expr::Inf);
    }
    Ok(simplify(&body.subst_var(b)))
}

fn limit_value(body: &Expr, b: &Expr, side: Side, env: &AssumptionEnv) -> Result<Expr> {
    // The one-sided limit of the owning branch, with abs removed near b.
    let (lo, hi) = match side {
        Side::Left => (Bound::NegInf, Bound::Finite(b.clone())),
        Side::Right => (Bound::Finite(b.clone()), Bound::PosInf),
    };
    let body = if body.has_abs() {
        let s = split_abs(body, &lo, &hi, env)?;
        match side {
            Side::Left => s.bodies.last().cloned().unwrap(),
            Side::Right => s.bodies[0].clone(),
        }
    } else {
        body.clone()
    };
    match side_limit(&body, b, side, env)? {
        Bound::Finite(v) => Ok(v),
        Bound::PosInf => Ok(Expr::Inf),
        Bound::NegInf => Err(Error::NotLsc(format!("{b} (value -inf)"))),
    }
}

pub(crate) fn guard_text(var: &str, bps: &[Expr], loc: Loc) -> String {
    let show = |e: &Expr| e.display(var).to_string();
    match loc {
        Loc::At(i) => format!("{var} = {}", show(&bps[i])),
        Loc::In(i) => {
            let n = bps.len();
            match (i, n) {
                (_, 0) => "all".to_string(),
                (0, _) => format!("{var} < {}", show(&bps[0])),
                (i, n) if i == n => format!("{var} > {}", show(&bps[n - 1])),
                (i, _) => format!("{} < {var} & {var} < {}", show(&bps[i - 1]), show(&bps[i])),
            }
        }
    }
}

/// Rows in breakpoint order, each `(guard, right-hand side)`.
pub(crate) fn rows(
    var: &str,
    bps: &[Expr],
    mut piece: impl FnMut(usize) -> String,
    mut point: impl FnMut(usize) -> String,
) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..=bps.len() {
        out.push((guard_text(var, bps, Loc::In(i)), piece(i)));
        if i < bps.len() {
            out.push((guard_text(var, bps, Loc::At(i)), point(i)));
        }
    }
    out
}

pub(crate) fn write_rows(f: &mut fmt::Formatter<'_>, head: &str, rows: &[(String, String)]) -> fmt::Result {
    if rows.len() == 1 {
        // A single piece on the whole line prints as its bare body.
        return write!(f, "{}", rows[0].1);
    }
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    writeln!(f, "{head}{{")?;
    for (k, (g, v)) in rows.iter().enumerate() {
        let sep = if k + 1 < rows.len() { " ;" } else { "" };
        writeln!(f, "  {g:<width$} -> {v}{sep}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for PiecewiseFunction {
    /// Text form in the `pw{...}` syntax, one row per interval and per
    /// breakpoint.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = &self.var;
        let show = |e: &Expr| if e.is_inf() { "inf".to_string() } else { e.display(var).to_string() };
        let rows = rows(var, &self.breakpoints, |i| show(&self.pieces[i].body), |i| show(&self.values[i]));
        write_rows(f, "pw", &rows)
    }
}
