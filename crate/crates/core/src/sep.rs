//! Separable functions on R^n, handled one coordinate at a time.

use crate::conv::conjugate;
use crate::env::AssumptionEnv;
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::monop::{eval_op, prox, SetValue};
use crate::number::{ExtReal, Number};
use crate::pwf::{parse_pwf, PiecewiseFunction};

/// `f(x) = f_1(x_1) + ... + f_n(x_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableFunction {
    pub coords: Vec<PiecewiseFunction>,
}

fn at<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Coordinate { index, source: Box::new(e) })
}

impl SeparableFunction {
    /// Coordinates separated by `;;`.
    pub fn parse(text: &str, env: &AssumptionEnv) -> Result<SeparableFunction> {
        let coords =
            text.split(";;").enumerate().map(|(i, t)| at(i, parse_pwf(t.trim(), env))).collect::<Result<_>>()?;
        Ok(SeparableFunction { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

pub fn separable_conjugate(f: &SeparableFunction) -> Result<SeparableFunction> {
    let coords = f.coords.iter().enumerate().map(|(i, g)| at(i, conjugate(g))).collect::<Result<_>>()?;
    Ok(SeparableFunction { coords })
}

/// Coordinatewise prox of `f` with step `lambda` at `x`.
pub fn separable_prox(f: &SeparableFunction, lambda: &Expr, x: &[Number], params: &Params) -> Result<Vec<SetValue>> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    f.coords
        .iter()
        .zip(x)
        .enumerate()
        .map(|(i, (g, xi))| at(i, prox(g, lambda).and_then(|p| eval_op(&p, &ExtReal::Finite(xi.clone()), params))))
        .collect()
}
