//! Shared pieces of the `pw{...}` and `sd{...}` front ends: guards, branch
//! lists, coverage checks, and assumption facts.

use crate::env::{AssumptionEnv, Cmp, Fact, Rel};
use crate::error::{Error, Result};
use crate::expr::{differentiate, simplify, Bound, Expr, Parser, Tok};

/// The set of variable values a guard selects: an interval with each finite
/// end open or closed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Guard {
    pub lo: Bound,
    pub lo_closed: bool,
    pub hi: Bound,
    pub hi_closed: bool,
}

impl Guard {
    fn everything() -> Guard {
        Guard { lo: Bound::NegInf, lo_closed: false, hi: Bound::PosInf, hi_closed: false }
    }

    fn is_point(&self) -> bool {
        self.lo_closed && self.hi_closed && self.lo == self.hi
    }
}

pub(crate) struct Branch<R> {
    pub guard: Guard,
    pub rhs: R,
}

/// Who supplies the value at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum PointOwner {
    /// A branch guarded by `x = b`.
    Point(usize),
    /// The branch to the left, through its closed upper end.
    Left(usize),
    /// The branch to the right, through its closed lower end.
    Right(usize),
}

/// Branches arranged along the line.
pub(crate) struct Layout {
    pub breakpoints: Vec<Expr>,
    /// Branch index for each open interval, left to right.
    pub pieces: Vec<usize>,
    pub points: Vec<PointOwner>,
}

/// Parse `head { guard -> rhs ; ... }`.
pub(crate) fn parse_branches<R>(
    p: &mut Parser,
    head: &str,
    env: &AssumptionEnv,
    rhs: &mut dyn FnMut(&mut Parser, &Guard) -> Result<R>,
) -> Result<Vec<Branch<R>>> {
    if !p.at_ident(head) {
        return Err(p.error(&[head]));
    }
    p.bump();
    p.expect("{")?;
    let mut out = Vec::new();
    loop {
        let guard = parse_guard(p, env)?;
        p.expect("->")?;
        let r = rhs(p, &guard)?;
        out.push(Branch { guard, rhs: r });
        if p.eat(";") {
            if p.at_sym("}") {
                break;
            }
            continue;
        }
        break;
    }
    p.expect("}")?;
    p.expect_end()?;
    Ok(out)
}

fn parse_guard(p: &mut Parser, env: &AssumptionEnv) -> Result<Guard> {
    let mut g = Guard::everything();
    let off = p.offset();
    apply_rel(&mut g, parse_rel(p)?, env, off)?;
    if p.eat("&") {
        let off = p.offset();
        apply_rel(&mut g, parse_rel(p)?, env, off)?;
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Op {
    fn flip(self) -> Op {
        match self {
            Op::Lt => Op::Gt,
            Op::Le => Op::Ge,
            Op::Eq => Op::Eq,
            Op::Ge => Op::Le,
            Op::Gt => Op::Lt,
        }
    }
}

fn parse_op(p: &mut Parser) -> Result<Op> {
    let op = match p.peek() {
        Tok::Sym("<") => Op::Lt,
        Tok::Sym("<=") => Op::Le,
        Tok::Sym("=") => Op::Eq,
        Tok::Sym(">=") => Op::Ge,
        Tok::Sym(">") => Op::Gt,
        _ => return Err(p.error(&["<", "<=", "=", ">=", ">"])),
    };
    p.bump();
    Ok(op)
}

/// `expr cmp expr`, solved for the variable: `x op bound`.
fn parse_rel(p: &mut Parser) -> Result<(Op, Expr, usize)> {
    let off = p.offset();
    let lhs = p.expr()?;
    let op = parse_op(p)?;
    let rhs = p.expr()?;
    let d = simplify(&Expr::sub(lhs, rhs));
    let c = differentiate(&d)?;
    let Some(cn) = c.as_number().filter(|_| !c.has_var()).cloned() else {
        return Err(Error::Syntax { offset: off, expected: vec!["guard affine in the variable".into()] });
    };
    if cn.is_zero() {
        return Err(Error::Syntax { offset: off, expected: vec!["guard mentioning the variable".into()] });
    }
    let rest = simplify(&Expr::sub(d, Expr::mul(Expr::Num(cn.clone()), Expr::Var)));
    if rest.has_var() {
        return Err(Error::Syntax { offset: off, expected: vec!["guard affine in the variable".into()] });
    }
    // c*x + rest op 0  =>  x op' -rest/c
    let bound = simplify(&Expr::div(Expr::neg(rest), Expr::Num(cn.clone())));
    let op = if cn.is_negative() { op.flip() } else { op };
    Ok((op, bound, off))
}

fn apply_rel(g: &mut Guard, (op, b, _): (Op, Expr, usize), env: &AssumptionEnv, off: usize) -> Result<()> {
    let nb = Bound::Finite(b);
    let tighten_lo = |g: &mut Guard, closed: bool| -> Result<()> {
        if g.lo != Bound::NegInf {
            return Err(Error::Syntax { offset: off, expected: vec!["one lower bound per guard".into()] });
        }
        g.lo = nb.clone();
        g.lo_closed = closed;
        Ok(())
    };
    let tighten_hi = |g: &mut Guard, closed: bool| -> Result<()> {
        if g.hi != Bound::PosInf {
            return Err(Error::Syntax { offset: off, expected: vec!["one upper bound per guard".into()] });
        }
        g.hi = nb.clone();
        g.hi_closed = closed;
        Ok(())
    };
    match op {
        Op::Lt => tighten_hi(g, false)?,
        Op::Le => tighten_hi(g, true)?,
        Op::Gt => tighten_lo(g, false)?,
        Op::Ge => tighten_lo(g, true)?,
        Op::Eq => {
            tighten_lo(g, true)?;
            tighten_hi(g, true)?;
        }
    }
    if let (Bound::Finite(_), Bound::Finite(_)) = (&g.lo, &g.hi) {
        match g.lo.compare(&g.hi, env)? {
            Cmp::Greater => return Err(Error::Syntax { offset: off, expected: vec!["nonempty guard".into()] }),
            Cmp::Equal if !g.is_point() && !(g.lo_closed && g.hi_closed) => {
                return Err(Error::Syntax { offset: off, expected: vec!["nonempty guard".into()] })
            }
            Cmp::Undecidable => return Err(Error::UndecidableComparison(g.lo.text(), g.hi.text())),
            _ => {}
        }
    }
    Ok(())
}

/// Check that the guards tile the line and arrange the branches in order.
pub(crate) fn layout<R>(branches: &[Branch<R>], env: &AssumptionEnv) -> Result<Layout> {
    let mut order: Vec<usize> = (0..branches.len()).collect();
    // Insertion sort under the environment's order; point guards first on ties.
    for i in 1..order.len() {
        let mut j = i;
        while j > 0 {
            let a = &branches[order[j - 1]].guard;
            let b = &branches[order[j]].guard;
            let swap = match a.lo.cmp_strict(&b.lo, env)? {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => !a.lo_closed && b.lo_closed,
                std::cmp::Ordering::Less => false,
            };
            if !swap {
                break;
            }
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut breakpoints = Vec::new();
    let mut pieces = Vec::new();
    let mut points = Vec::new();
    let mut reach = Bound::NegInf;
    let mut reach_closed = false;
    // Branch whose closed upper end reaches the current frontier.
    let mut closer: Option<usize> = None;
    for &k in &order {
        let g = &branches[k].guard;
        let at = reach.text();
        match g.lo.cmp_strict(&reach, env)? {
            std::cmp::Ordering::Less => return Err(Error::OverlappingGuards(at)),
            std::cmp::Ordering::Greater => return Err(Error::GapInGuards(at)),
            std::cmp::Ordering::Equal => {}
        }
        if let Bound::Finite(b) = &g.lo {
            match (reach_closed, g.lo_closed) {
                (true, true) => return Err(Error::OverlappingGuards(at)),
                (false, false) => return Err(Error::GapInGuards(at)),
                (false, true) => {
                    breakpoints.push(b.clone());
                    points.push(if g.is_point() { PointOwner::Point(k) } else { PointOwner::Right(k) });
                }
                (true, false) => {}
            }
            if closer.is_some() && !reach_closed {
                return Err(Error::Internal("guard frontier bookkeeping".into()));
            }
            if let (Some(c), true) = (closer.take(), reach_closed) {
                breakpoints.push(b.clone());
                points.push(PointOwner::Left(c));
            }
        }
        if !g.is_point() {
            pieces.push(k);
        }
        reach = g.hi.clone();
        reach_closed = g.hi_closed;
        closer = if g.hi_closed && !g.is_point() { Some(k) } else { None };
    }
    if reach != Bound::PosInf {
        return Err(Error::GapInGuards(reach.text()));
    }
    if pieces.len() != breakpoints.len() + 1 {
        return Err(Error::GapInGuards("an isolated point".into()));
    }
    Ok(Layout { breakpoints, pieces, points })
}

/// Parse an assumption such as `0 < l` or `a <= b`.
pub fn parse_fact(text: &str) -> Result<Fact> {
    // No identifier can equal the empty variable name.
    let mut p = Parser::new(text, "")?;
    let lhs = p.expr()?;
    let off = p.offset();
    let op = parse_op(&mut p)?;
    let rhs = p.expr()?;
    p.expect_end()?;
    let lin = |e: &Expr| {
        e.to_linform().ok_or(Error::Syntax { offset: off, expected: vec!["affine combination of parameters".into()] })
    };
    let (l, r) = (lin(&lhs)?, lin(&rhs)?);
    Ok(match op {
        Op::Lt => Fact { lhs: l, rel: Rel::Lt, rhs: r },
        Op::Le => Fact { lhs: l, rel: Rel::Le, rhs: r },
        Op::Gt => Fact { lhs: r, rel: Rel::Lt, rhs: l },
        Op::Ge => Fact { lhs: r, rel: Rel::Le, rhs: l },
        Op::Eq => return Err(Error::Syntax { offset: off, expected: vec!["<".into(), "<=".into()] }),
    })
}

/// Build an environment from assumption strings.
pub fn parse_env<S: AsRef<str>>(facts: &[S]) -> Result<AssumptionEnv> {
    let parsed = facts.iter().map(|f| parse_fact(f.as_ref())).collect::<Result<Vec<_>>>()?;
    AssumptionEnv::new(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branches(text: &str, env: &AssumptionEnv) -> Result<Vec<Branch<Expr>>> {
        let mut p = Parser::new(text, "x")?;
        parse_branches(&mut p, "pw", env, &mut |p, _| p.expr())
    }

    #[test]
    fn facts_parse_both_directions() {
        let f = parse_fact("l > 0").unwrap();
        assert_eq!(f.rel, Rel::Lt);
        assert!(f.lhs.is_constant());
        assert!(parse_fact("x + y").is_err());
        assert!(parse_fact("a = b").is_err());
    }

    #[test]
    fn three_way_split_tiles_the_line() {
        let env = parse_env(&["a < b"]).unwrap();
        let bs = branches("pw{ x<a -> 1 ; a<=x & x<=b -> 0 ; x>b -> 1 }", &env).unwrap();
        let l = layout(&bs, &env).unwrap();
        assert_eq!(l.breakpoints.len(), 2);
        assert_eq!(l.pieces, vec![0, 1, 2]);
        assert_eq!(l.points, vec![PointOwner::Right(1), PointOwner::Left(1)]);
    }

    #[test]
    fn point_guards_own_their_breakpoint() {
        let env = AssumptionEnv::empty();
        let bs = branches("pw{ x>0 -> x ; x=0 -> 0 ; x<0 -> -x }", &env).unwrap();
        let l = layout(&bs, &env).unwrap();
        assert_eq!(l.pieces, vec![2, 0]);
        assert_eq!(l.points, vec![PointOwner::Point(1)]);
    }

    #[test]
    fn gaps_and_overlaps_are_reported() {
        let env = AssumptionEnv::empty();
        let bs = branches("pw{ x<0 -> 1 ; x>0 -> 2 }", &env).unwrap();
        assert!(matches!(layout(&bs, &env), Err(Error::GapInGuards(_))));
        let bs = branches("pw{ x<=0 -> 1 ; x>=0 -> 2 }", &env).unwrap();
        assert!(matches!(layout(&bs, &env), Err(Error::OverlappingGuards(_))));
        let bs = branches("pw{ x<1 -> 1 ; x>0 -> 2 }", &env).unwrap();
        assert!(matches!(layout(&bs, &env), Err(Error::OverlappingGuards(_))));
    }

    #[test]
    fn guards_are_solved_for_the_variable() {
        let env = AssumptionEnv::empty();
        let bs = branches("pw{ 2*x < 1 -> 0 ; 1 <= 2*x -> 1 }", &env).unwrap();
        assert_eq!(bs[0].guard.hi, Bound::Finite(Expr::ratio(1, 2)));
        assert!(branches("pw{ x*x < 1 -> 0 }", &env).is_err());
    }

    #[test]
    fn undecidable_order_is_an_error() {
        let env = AssumptionEnv::empty();
        let r = branches("pw{ x<a -> 1 ; a<=x & x<=b -> 0 ; x>b -> 1 }", &env);
        assert!(matches!(r, Err(Error::UndecidableComparison(..))));
    }
}
