use std::fmt;

use num_traits::{Signed, Zero};

use super::{Bound, Expr};
use crate::number::Number;

/// An expression rendered with a chosen variable name.
pub struct Printed<'a> {
    pub expr: &'a Expr,
    pub var: &'a str,
}

impl Expr {
    pub fn display<'a>(&'a self, var: &'a str) -> Printed<'a> {
        Printed { expr: self, var }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.expr, self.var))
    }
}

// Binding strength: sums 1, products 2, negation 3, powers 4, atoms 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        // A negated product prints at product level: `-a*b`.
        Expr::Neg(a) if prec(a) == 2 => 2,
        Expr::Neg(_) => 3,
        Expr::Num(n) if n.is_negative() => 3,
        Expr::Num(Number::Rational(r)) if !r.is_integer() => 4,
        Expr::Num(Number::Decimal(d)) if d.is_infinite() => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn wrap(e: &Expr, var: &str, min: u8) -> String {
    let s = render(e, var);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn is_int_literal(e: &Expr) -> bool {
    matches!(e, Expr::Num(Number::Rational(r)) if r.is_integer() && !r.is_negative())
}

// A leading minus would otherwise swallow the whole product on reparse.
fn product_left(a: &Expr, var: &str) -> String {
    if prec(a) == 3 || matches!(a, Expr::Neg(_)) {
        format!("({})", render(a, var))
    } else {
        wrap(a, var, 2)
    }
}

/// True if `s` ends in an integer token that the lexer would merge with a
/// following `/int` into one rational literal.
fn ends_with_int_literal(s: &str) -> bool {
    let trimmed = s.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.len() == s.len() {
        return false;
    }
    !matches!(trimmed.chars().last(), Some(c) if c == '^' || c == '.' || c == '_' || c.is_ascii_alphanumeric())
}

pub(super) fn render(e: &Expr, var: &str) -> String {
    match e {
        Expr::Num(n) => render_number(n),
        Expr::Var => var.to_string(),
        Expr::Param(p) => p.clone(),
        Expr::Inf => "inf".into(),
        Expr::Neg(a) => format!("-{}", wrap(a, var, 2)),
        Expr::Abs(a) => format!("abs({})", render(a, var)),
        Expr::Exp(a) => format!("exp({})", render(a, var)),
        Expr::Ln(a) => format!("ln({})", render(a, var)),
        Expr::Sqrt(a) => format!("sqrt({})", render(a, var)),
        Expr::Add(a, b) => format!("{} + {}", wrap(a, var, 1), wrap(b, var, 2)),
        Expr::Sub(a, b) => format!("{} - {}", wrap(a, var, 1), wrap(b, var, 2)),
        Expr::Mul(a, b) => format!("{}*{}", product_left(a, var), wrap(b, var, 3)),
        Expr::Div(a, b) => {
            let left = product_left(a, var);
            // Keep `int / int` from lexing as a single rational literal.
            let right = if is_int_literal(b) && ends_with_int_literal(&left) {
                format!("({})", render(b, var))
            } else {
                wrap(b, var, 3)
            };
            format!("{left}/{right}")
        }
        Expr::Pow(a, k) => {
            let base = wrap(a, var, 5);
            let exp = if k.is_integer() && !k.is_negative() {
                k.numer().to_string()
            } else if k.is_integer() {
                format!("({})", k.numer())
            } else {
                format!("({}/{})", k.numer(), k.denom())
            };
            format!("{base}^{exp}")
        }
        Expr::Implicit(inv, a) => format!(
            "inverse[{} on ({}, {})]({})",
            render(&inv.forward, "t"),
            bound_text(&inv.lo),
            bound_text(&inv.hi),
            render(a, var)
        ),
        Expr::Integral(q, a) => {
            format!("integral[{} from {}]({})", render(&q.integrand, "t"), render(&q.from, var), render(a, var))
        }
    }
}

fn bound_text(b: &Bound) -> String {
    match b {
        Bound::NegInf => "-inf".into(),
        Bound::PosInf => "inf".into(),
        Bound::Finite(e) => render(e, "t"),
    }
}

fn render_number(n: &Number) -> String {
    match n {
        Number::Rational(r) => {
            if r.is_integer() {
                r.numer().to_string()
            } else if r.is_zero() {
                "0".into()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        }
        Number::Decimal(d) => {
            if d.is_infinite() {
                return if *d > 0.0 { "inf".into() } else { "-inf".into() };
            }
            let s = format!("{d:?}");
            if s.contains(['.', 'e', 'E']) {
                s
            } else {
                format!("{s}.0")
            }
        }
    }
}
