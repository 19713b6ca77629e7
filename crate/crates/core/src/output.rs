//! Machine-readable output.
//!
//! Numbers are written as exact `p/q` when rational, otherwise with 17
//! significant digits. Anything still holding a parameter is written as
//! expression text.

use serde::Serialize;
use serde_json::Value;

use crate::expr::{Bound, Expr};
use crate::monop::{MonotoneOperator, OpPiece, SetValue};
use crate::number::{ExtReal, Number};
use crate::pwf::PiecewiseFunction;

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct JsonObject {
    pub kind: &'static str,
    pub var: String,
    pub breakpoints: Vec<String>,
    pub pieces: Vec<JsonPiece>,
    pub at_breakpoints: Vec<JsonPoint>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct JsonPiece {
    pub interval: JsonInterval,
    pub kind: &'static str,
    pub expr: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct JsonInterval {
    pub lo: String,
    pub hi: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct JsonPoint {
    pub x: String,
    pub value: JsonSet,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct JsonSet {
    #[serde(rename = "type")]
    pub ty: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<String>,
}

pub fn number_str(n: &Number) -> String {
    match n {
        Number::Rational(_) => n.to_string(),
        Number::Decimal(d) if d.is_infinite() => if *d > 0.0 { "inf" } else { "-inf" }.into(),
        Number::Decimal(d) => format!("{d:.16e}"),
    }
}

/// A variable-free expression as a number string.
pub fn numstr(e: &Expr) -> String {
    if e.is_inf() {
        return "inf".into();
    }
    match e.constant_value() {
        Some(n) => number_str(&n),
        None => e.to_string(),
    }
}

pub fn bound_str(b: &Bound) -> String {
    match b {
        Bound::NegInf => "-inf".into(),
        Bound::PosInf => "inf".into(),
        Bound::Finite(e) => numstr(e),
    }
}

pub fn ext_str(v: &ExtReal) -> String {
    match v {
        ExtReal::Finite(n) => number_str(n),
        ExtReal::PosInf => "inf".into(),
        ExtReal::NegInf => "-inf".into(),
    }
}

pub fn set_json(v: &SetValue) -> JsonSet {
    match v {
        SetValue::Empty => JsonSet { ty: "empty", lo: None, hi: None },
        SetValue::All => JsonSet { ty: "all", lo: None, hi: None },
        SetValue::Point(e) => JsonSet { ty: "point", lo: Some(numstr(e)), hi: Some(numstr(e)) },
        SetValue::Interval(a, b) => JsonSet { ty: "interval", lo: Some(bound_str(a)), hi: Some(bound_str(b)) },
    }
}

fn intervals(bps: &[Expr]) -> Vec<JsonInterval> {
    (0..=bps.len())
        .map(|i| JsonInterval {
            lo: if i == 0 { "-inf".into() } else { numstr(&bps[i - 1]) },
            hi: if i == bps.len() { "inf".into() } else { numstr(&bps[i]) },
        })
        .collect()
}

pub fn pwf_json(f: &PiecewiseFunction) -> JsonObject {
    let pieces = intervals(&f.breakpoints)
        .into_iter()
        .zip(&f.pieces)
        .map(|(interval, p)| JsonPiece {
            interval,
            kind: p.kind.name(),
            expr: if p.is_finite() { p.body.display(&f.var).to_string() } else { "inf".into() },
        })
        .collect();
    let at_breakpoints = f
        .breakpoints
        .iter()
        .zip(&f.values)
        .map(|(b, v)| JsonPoint {
            x: numstr(b),
            value: JsonSet { ty: "point", lo: Some(numstr(v)), hi: Some(numstr(v)) },
        })
        .collect();
    JsonObject {
        kind: "pwf",
        var: f.var.clone(),
        breakpoints: f.breakpoints.iter().map(numstr).collect(),
        pieces,
        at_breakpoints,
    }
}

pub fn op_json(t: &MonotoneOperator) -> JsonObject {
    let pieces = intervals(&t.breakpoints)
        .into_iter()
        .zip(&t.pieces)
        .map(|(interval, p)| match p {
            OpPiece::Single { body, kind } => {
                JsonPiece { interval, kind: kind.name(), expr: body.display(&t.var).to_string() }
            }
            OpPiece::Empty => JsonPiece { interval, kind: "empty", expr: "empty".into() },
        })
        .collect();
    let at_breakpoints =
        t.breakpoints.iter().zip(&t.values).map(|(b, v)| JsonPoint { x: numstr(b), value: set_json(v) }).collect();
    JsonObject {
        kind: "op",
        var: t.var.clone(),
        breakpoints: t.breakpoints.iter().map(numstr).collect(),
        pieces,
        at_breakpoints,
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output types always serialize")
}
