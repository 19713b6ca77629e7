use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::eval::params_f64;
use super::numeric::chebyshev_nodes;
use super::poly::Poly;
use super::{differentiate, eval_f64, limit, simplify, Approach, Bound, Expr, ImplicitInverse, ParamsF64};
use crate::env::AssumptionEnv;
use crate::error::{Error, Result};

/// Inverse of a strictly increasing expression on an open interval.
#[derive(Clone, Debug, PartialEq)]
pub enum InverseResult {
    /// Closed form from the inverse table.
    Symbolic { inverse: Expr, lo: Bound, hi: Bound },
    /// Bisection-evaluated inverse (an [`Expr::Implicit`] node).
    Implicit { inverse: Expr, lo: Bound, hi: Bound },
}

impl InverseResult {
    pub fn inverse(&self) -> &Expr {
        match self {
            InverseResult::Symbolic { inverse, .. } | InverseResult::Implicit { inverse, .. } => inverse,
        }
    }

    /// The open image interval, which is the domain of the inverse.
    pub fn image(&self) -> (&Bound, &Bound) {
        match self {
            InverseResult::Symbolic { lo, hi, .. } | InverseResult::Implicit { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, InverseResult::Symbolic { .. })
    }
}

const PLACEHOLDER: &str = "\u{1}y";
const SAMPLES: usize = 33;

/// Invert `e` on `(lo, hi)`. The inverse's variable is the image variable.
pub fn invert_monotone(e: &Expr, lo: &Bound, hi: &Bound, env: &AssumptionEnv) -> Result<InverseResult> {
    let mut names: BTreeSet<String> = e.params();
    for b in [lo, hi] {
        if let Bound::Finite(x) = b {
            names.extend(x.params());
        }
    }
    let names: Vec<String> = names.into_iter().collect();
    let pf = params_f64(&env.witness(&names));
    let lo_f = lo.eval_f64(&pf)?;
    let hi_f = hi.eval_f64(&pf)?;
    check_increasing(e, lo_f, hi_f, &pf)?;

    let img_lo = match lo {
        Bound::Finite(a) => limit(e, &Approach::Right(a.clone()), env)?,
        _ => limit(e, &Approach::NegInf, env)?,
    };
    let img_hi = match hi {
        Bound::Finite(b) => limit(e, &Approach::Left(b.clone()), env)?,
        _ => limit(e, &Approach::PosInf, env)?,
    };

    let nodes = chebyshev_nodes(lo_f, hi_f, 10.0, SAMPLES);
    let mid = nodes[SAMPLES / 2];
    let ctx = Solve { pf: &pf, x_mid: mid };
    if let Some(g) = ctx.solve(e, Expr::param(PLACEHOLDER)) {
        let g = simplify(&g.map_leaves(&|t| match t {
            Expr::Param(p) if p == PLACEHOLDER => Some(Expr::Var),
            _ => None,
        }));
        if round_trips(e, &g, &nodes, &pf) {
            return Ok(InverseResult::Symbolic { inverse: g, lo: img_lo, hi: img_hi });
        }
    }
    let inv = ImplicitInverse { forward: e.clone(), lo: lo.clone(), hi: hi.clone() };
    Ok(InverseResult::Implicit { inverse: Expr::Implicit(Arc::new(inv), Box::new(Expr::Var)), lo: img_lo, hi: img_hi })
}

/// Sampled guardrail: the derivative must not be negative at Chebyshev
/// nodes of the interval, both at the wide clip and near the origin.
fn check_increasing(e: &Expr, lo: f64, hi: f64, pf: &ParamsF64) -> Result<()> {
    let Ok(de) = differentiate(e) else {
        return Ok(());
    };
    let mut nodes = chebyshev_nodes(lo, hi, 1e10, SAMPLES);
    nodes.extend(chebyshev_nodes(lo, hi, 10.0, SAMPLES));
    for x in nodes {
        if let Ok(v) = eval_f64(&de, x, pf) {
            if v.is_finite() && v < -1e-12 {
                return Err(Error::NotMonotone(format!("{e} has slope {v:.6e} at {x:.6e}")));
            }
        }
    }
    Ok(())
}

fn round_trips(e: &Expr, g: &Expr, nodes: &[f64], pf: &ParamsF64) -> bool {
    let mut checked = 0;
    for &x in nodes {
        let Ok(y) = eval_f64(e, x, pf) else { continue };
        if !y.is_finite() {
            continue;
        }
        match eval_f64(g, y, pf) {
            Ok(back) if (back - x).abs() <= 1e-7 * (1.0 + x.abs()) => checked += 1,
            _ => return false,
        }
    }
    checked > 0
}

struct Solve<'a> {
    pf: &'a ParamsF64,
    x_mid: f64,
}

impl Solve<'_> {
    /// An expression `x(target)` with `e(x) = target`.
    fn solve(&self, e: &Expr, target: Expr) -> Option<Expr> {
        if *e == Expr::Var {
            return Some(target);
        }
        let p = Poly::from_expr(e)?;
        let (with, without) = p.split_var();
        let t = Expr::sub(target, without.to_expr());
        if let Some((a, _)) = with.affine_in_var() {
            if a.is_zero() {
                return None;
            }
            return Some(Expr::div(t, a.to_expr()));
        }
        let (c, factors) = with.single_term()?;
        let (var_f, const_f): (Vec<_>, Vec<_>) = factors.into_iter().partition(|(a, _)| a.has_var());
        let [(atom, k)] = var_f.as_slice() else {
            return None;
        };
        let scale = const_f
            .into_iter()
            .map(|(a, j)| if j.is_one() { a } else { Expr::pow(a, j) })
            .fold(Expr::Num(c), Expr::mul);
        let v = self.root(Expr::div(t, scale), k, atom)?;
        match atom {
            Expr::Var => Some(v),
            Expr::Exp(u) => self.solve(u, Expr::ln(v)),
            Expr::Ln(u) => self.solve(u, Expr::exp(v)),
            Expr::Sqrt(u) => self.solve(u, Expr::powi(v, 2)),
            Expr::Pow(u, j) => {
                let w = self.root(v, j, u)?;
                self.solve(u, w)
            }
            Expr::Implicit(inv, u) => self.solve(u, inv.forward.subst_var(&v)),
            Expr::Abs(_) | Expr::Integral(..) => None,
            sum => self.solve(sum, v),
        }
    }

    /// `a` from `a^k = v`, choosing the branch by the sign of `a` inside
    /// the interval when `k` has an even numerator.
    fn root(&self, v: Expr, k: &BigRational, a: &Expr) -> Option<Expr> {
        if k.is_one() {
            return Some(v);
        }
        if k.is_zero() {
            return None;
        }
        let r = Expr::pow(v, k.recip());
        if k.numer() % 2 == 0.into() {
            let s = eval_f64(a, self.x_mid, self.pf).ok()?;
            if s < 0.0 {
                return Some(Expr::neg(r));
            }
            if s == 0.0 {
                return None;
            }
        }
        Some(r)
    }
}
