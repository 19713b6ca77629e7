use num_traits::Signed;

use super::poly::Poly;
use super::{simplify, Expr};
use crate::env::{AssumptionEnv, Cmp, LinForm};
use crate::error::Result;
use crate::number::Number;

const EQ_REL_TOL: f64 = 1e-12;

/// Order of two variable-free expressions: exact for parameter-affine
/// differences, numeric (relative tolerance `1e-12` for equality) when no
/// parameters occur, otherwise by structural sign rules.
pub fn compare_exprs(a: &Expr, b: &Expr, env: &AssumptionEnv) -> Result<Cmp> {
    let d = simplify(&Expr::sub(a.clone(), b.clone()));
    if let Some(n) = d.as_number() {
        if n.is_exact() {
            return Ok(Cmp::from_ordering(n.signum()));
        }
    }
    if let Some(l) = d.to_linform() {
        return env.compare(&l, &LinForm::default());
    }
    if !d.has_var() && d.params().is_empty() {
        if let Some(v) = d.constant_value() {
            if v.is_exact() {
                return Ok(Cmp::from_ordering(v.signum()));
            }
        }
        let (Some(va), Some(vb)) = (a.constant_value(), b.constant_value()) else {
            return Ok(Cmp::Undecidable);
        };
        let (fa, fb) = (va.to_f64(), vb.to_f64());
        if !fa.is_finite() || !fb.is_finite() {
            return Ok(Cmp::Undecidable);
        }
        let scale = 1f64.max(fa.abs()).max(fb.abs());
        if (fa - fb).abs() <= EQ_REL_TOL * scale {
            return Ok(Cmp::Equal);
        }
        return Ok(if fa < fb { Cmp::Less } else { Cmp::Greater });
    }
    Ok(sign_of(&d, env))
}

/// Sign of an expression as an order against zero.
pub fn sign_of(e: &Expr, env: &AssumptionEnv) -> Cmp {
    match sign(e, env) {
        Sign::Pos => Cmp::Greater,
        Sign::Neg => Cmp::Less,
        Sign::Zero => Cmp::Equal,
        _ => Cmp::Undecidable,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Sign {
    Pos,
    Neg,
    Zero,
    NonNeg,
    NonPos,
    Unknown,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
            Sign::NonNeg => Sign::NonPos,
            Sign::NonPos => Sign::NonNeg,
            s => s,
        }
    }

    fn of_number(n: &Number) -> Sign {
        match n.signum() {
            std::cmp::Ordering::Less => Sign::Neg,
            std::cmp::Ordering::Equal => Sign::Zero,
            std::cmp::Ordering::Greater => Sign::Pos,
        }
    }

    fn from_cmp(c: Cmp) -> Sign {
        match c {
            Cmp::Less => Sign::Neg,
            Cmp::Equal => Sign::Zero,
            Cmp::Greater => Sign::Pos,
            Cmp::Undecidable => Sign::Unknown,
        }
    }

    fn mul(self, o: Sign) -> Sign {
        use Sign::*;
        match (self, o) {
            (Zero, _) | (_, Zero) => Zero,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Pos, s) | (s, Pos) => s,
            (Neg, s) | (s, Neg) => s.flip(),
            (NonNeg, NonNeg) | (NonPos, NonPos) => NonNeg,
            _ => NonPos,
        }
    }

    fn add(self, o: Sign) -> Sign {
        use Sign::*;
        match (self, o) {
            (Zero, s) | (s, Zero) => s,
            (Pos, Pos) | (Pos, NonNeg) | (NonNeg, Pos) => Pos,
            (NonNeg, NonNeg) => NonNeg,
            (Neg, Neg) | (Neg, NonPos) | (NonPos, Neg) => Neg,
            (NonPos, NonPos) => NonPos,
            _ => Unknown,
        }
    }
}

pub(crate) fn sign(e: &Expr, env: &AssumptionEnv) -> Sign {
    if let Some(n) = e.as_number() {
        return Sign::of_number(n);
    }
    if !e.has_var() {
        if let Some(l) = e.to_linform() {
            return env.compare(&l, &LinForm::default()).map(Sign::from_cmp).unwrap_or(Sign::Unknown);
        }
        if e.params().is_empty() {
            if let Some(v) = e.constant_value() {
                return Sign::of_number(&v);
            }
        }
    }
    let Some(p) = Poly::from_expr(e) else {
        return Sign::Unknown;
    };
    let terms = p.term_list();
    if terms.len() == 1 && terms[0].1.len() == 1 && terms[0].1[0].1 == num_traits::One::one() {
        let (c, f) = &terms[0];
        return Sign::of_number(c).mul(atom_sign(&f[0].0, env));
    }
    let mut acc = Sign::Zero;
    for (c, factors) in terms {
        let mut s = Sign::of_number(&c);
        for (atom, k) in factors {
            let base = atom_sign(&atom, env);
            let even = k.numer() % 2 == 0.into();
            let fs = if even {
                match base {
                    Sign::Pos | Sign::Neg => Sign::Pos,
                    Sign::Zero => Sign::Zero,
                    _ => Sign::NonNeg,
                }
            } else {
                base
            };
            // Negative powers keep the sign; zero bases are undefined there.
            let fs = if k.is_negative() && fs == Sign::Zero { Sign::Unknown } else { fs };
            s = s.mul(fs);
        }
        acc = acc.add(s);
        if acc == Sign::Unknown {
            break;
        }
    }
    acc
}

fn atom_sign(a: &Expr, env: &AssumptionEnv) -> Sign {
    match a {
        Expr::Param(p) => {
            env.compare(&LinForm::param(p), &LinForm::default()).map(Sign::from_cmp).unwrap_or(Sign::Unknown)
        }
        Expr::Var => Sign::Unknown,
        Expr::Exp(_) => Sign::Pos,
        Expr::Abs(u) => match sign(u, env) {
            Sign::Pos | Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            _ => Sign::NonNeg,
        },
        Expr::Sqrt(u) => match sign(u, env) {
            Sign::Pos => Sign::Pos,
            Sign::Zero => Sign::Zero,
            _ => Sign::NonNeg,
        },
        Expr::Ln(u) => {
            let d = simplify(&Expr::sub((**u).clone(), Expr::int(1)));
            sign(&d, env)
        }
        Expr::Pow(u, k) => {
            let s = sign(u, env);
            if k.numer() % 2 == 0.into() {
                match s {
                    Sign::Pos | Sign::Neg => Sign::Pos,
                    Sign::Zero => Sign::Zero,
                    _ => Sign::NonNeg,
                }
            } else {
                s
            }
        }
        Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Div(..) | Expr::Neg(_) => sign(a, env),
        _ => Sign::Unknown,
    }
}
