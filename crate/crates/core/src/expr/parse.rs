//! Tokenizer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! factor := base ("^" exponent)?
//! term   := "-" term | factor (("*"|"/") factor)*
//! base   := number | var | ident | "(" expr ")" | call | "-" factor
//! call   := ("abs"|"exp"|"ln"|"sqrt") "(" expr ")"
//! number := decimal | int ("/" int)?
//! ```
//!
//! The DSL parsers reuse [`Parser`] for their own punctuation.

use num_rational::BigRational;

use super::Expr;
use crate::error::{Error, Result};
use crate::number::{decimal_to_rational, Number};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Int(String),
    Rational(String),
    Decimal(String),
    Ident(String),
    Sym(&'static str),
    End,
}

const SYMBOLS: [&str; 21] =
    ["->", "<=", ">=", "+", "-", "*", "/", "^", "(", ")", "{", "}", "[", "]", ",", ";", "&", "<", ">", "=", "|"];

const CALLS: [&str; 4] = ["abs", "exp", "ln", "sqrt"];

const OPERAND: [&str; 5] = ["number", "identifier", "(", "-", "function call"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_decimal = false;
            if i < bytes.len() && bytes[i] == b'.' {
                is_decimal = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    is_decimal = true;
                    i = j;
                }
            }
            if is_decimal {
                out.push((Tok::Decimal(text[start..i].to_string()), start));
                continue;
            }
            // int "/" int is a single rational literal.
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            // Not after `^`, so that `x^2/3` is `(x^2)/3`.
            let after_caret = matches!(out.last(), Some((Tok::Sym("^"), _)));
            if !after_caret && j < bytes.len() && bytes[j] == b'/' {
                let mut k = j + 1;
                while k < bytes.len() && bytes[k].is_ascii_whitespace() {
                    k += 1;
                }
                let dstart = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let continues =
                    k < bytes.len() && (bytes[k] == b'.' || bytes[k].is_ascii_alphabetic() || bytes[k] == b'_');
                if k > dstart && !continues {
                    let lit = format!("{}/{}", &text[start..i], &text[dstart..k]);
                    out.push((Tok::Rational(lit), start));
                    i = k;
                    continue;
                }
            }
            out.push((Tok::Int(text[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push((Tok::Sym(s), start));
                i += s.len();
            }
            None => {
                return Err(Error::Syntax { offset: i, expected: vec!["token".into()] });
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    var: String,
}

impl Parser {
    pub(crate) fn new(text: &str, var: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, var: var.to_string() })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub(crate) fn at_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    pub(crate) fn eat(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&[s]))
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::End)
    }

    pub(crate) fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(&["end of input", "operator"]))
        }
    }

    pub(crate) fn error(&self, expected: &[&str]) -> Error {
        Error::Syntax { offset: self.offset(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat("-") {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        // A leading minus negates the whole product: `-l*x` is `-(l*x)`.
        if self.eat("-") {
            return Ok(Expr::neg(self.term()?));
        }
        let mut acc = self.factor()?;
        loop {
            if self.eat("*") {
                acc = Expr::mul(acc, self.factor()?);
            } else if self.eat("/") {
                acc = Expr::div(acc, self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat("^") {
            let k = self.exponent()?;
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<BigRational> {
        let paren = self.eat("(");
        let neg = self.eat("-");
        let off = self.offset();
        let r = match self.bump() {
            Tok::Int(s) | Tok::Rational(s) | Tok::Decimal(s) => Number::parse_exact(&s)
                .ok_or(Error::Syntax { offset: off, expected: vec!["rational exponent".into()] })?,
            _ => {
                return Err(Error::Syntax { offset: off, expected: vec!["rational exponent".into()] });
            }
        };
        if paren {
            self.expect(")")?;
        }
        Ok(if neg { -r } else { r })
    }

    fn base(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Int(s) | Tok::Rational(s) => {
                self.bump();
                let r =
                    Number::parse_exact(&s).ok_or(Error::Syntax { offset: off, expected: vec!["number".into()] })?;
                Ok(Expr::rational(r))
            }
            Tok::Decimal(s) => {
                self.bump();
                let v: f64 = s.parse().map_err(|_| Error::Syntax { offset: off, expected: vec!["number".into()] })?;
                debug_assert!(decimal_to_rational(&s).is_some());
                Ok(Expr::decimal(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(Expr::neg(self.factor()?))
            }
            Tok::Ident(name) => {
                if CALLS.contains(&name.as_str()) {
                    self.bump();
                    self.expect("(")?;
                    let a = self.expr()?;
                    self.expect(")")?;
                    return Ok(match name.as_str() {
                        "abs" => Expr::abs(a),
                        "exp" => Expr::exp(a),
                        "ln" => Expr::ln(a),
                        _ => Expr::sqrt(a),
                    });
                }
                if name == "inf" {
                    return Err(self.error(&["finite operand"]));
                }
                self.bump();
                if name == self.var {
                    Ok(Expr::Var)
                } else {
                    Ok(Expr::Param(name))
                }
            }
            _ => Err(self.error(&OPERAND)),
        }
    }
}

/// Parse an expression in the variable `x`.
pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_expr_in(text, "x")
}

/// Parse an expression whose free variable is named `var`. A bare `inf`
/// parses as the infinite body.
pub fn parse_expr_in(text: &str, var: &str) -> Result<Expr> {
    let mut p = Parser::new(text, var)?;
    if p.at_ident("inf") && matches!(p.peek_at(1), Tok::End) {
        return Ok(Expr::Inf);
    }
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_call() {
        assert_eq!(parse_expr("abs(x)").unwrap(), Expr::abs(Expr::Var));
    }

    #[test]
    fn exponential_cdf_shape() {
        let e = parse_expr("1 - exp(-l*x)").unwrap();
        let want = Expr::sub(Expr::int(1), Expr::exp(Expr::neg(Expr::mul(Expr::param("l"), Expr::Var))));
        assert_eq!(e, want);
    }

    #[test]
    fn incomplete_input_reports_offset() {
        match parse_expr("x +").unwrap_err() {
            Error::Syntax { offset, expected } => {
                assert_eq!(offset, 3);
                assert!(expected.contains(&"number".to_string()));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rational_literal_and_division() {
        assert_eq!(parse_expr("1/2").unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse_expr("x/2").unwrap(), Expr::div(Expr::Var, Expr::int(2)));
        assert_eq!(parse_expr("2/x").unwrap(), Expr::div(Expr::int(2), Expr::Var));
    }

    #[test]
    fn exponents() {
        assert_eq!(parse_expr("x^(1/3)").unwrap(), Expr::pow(Expr::Var, super::super::rat(1, 3)));
        assert_eq!(parse_expr("x^-1").unwrap(), Expr::powi(Expr::Var, -1));
        assert_eq!(parse_expr("x^0.5").unwrap(), Expr::pow(Expr::Var, super::super::rat(1, 2)));
        assert_eq!(parse_expr("-x^2").unwrap(), Expr::neg(Expr::powi(Expr::Var, 2)));
        assert_eq!(parse_expr("x^2/2").unwrap(), Expr::div(Expr::powi(Expr::Var, 2), Expr::int(2)));
    }

    #[test]
    fn inf_only_as_whole_body() {
        assert_eq!(parse_expr("inf").unwrap(), Expr::Inf);
        assert!(parse_expr("1 + inf").is_err());
    }

    #[test]
    fn named_variable() {
        assert_eq!(parse_expr_in("y + x", "y").unwrap(), Expr::add(Expr::Var, Expr::param("x")));
    }
}
