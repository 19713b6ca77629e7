//! Symbolic expressions in one variable and named parameters.

mod diff;
mod eval;
mod integrate;
mod invert;
mod limit;
mod numeric;
mod parse;
mod poly;
mod print;
mod sign;
mod simplify;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::env::{AssumptionEnv, Cmp, LinForm};
use crate::error::{Error, Result};
use crate::number::{ExtReal, Number};

pub use diff::differentiate;
pub use eval::{eval, eval_f64, eval_number, params_f64, Params, ParamsF64};
pub use integrate::antiderivative;
pub use invert::{invert_monotone, InverseResult};
pub use limit::{limit, Approach};
pub(crate) use numeric::chebyshev_nodes;
pub use numeric::{ImplicitInverse, NumericIntegral};
pub use parse::{parse_expr, parse_expr_in};
pub(crate) use parse::{Parser, Tok};
pub use print::Printed;
pub use sign::{compare_exprs, sign_of};
pub use simplify::simplify;

/// Expression tree. Every value is immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Number),
    /// The single free variable.
    Var,
    Param(String),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, BigRational),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
    /// `+inf`, only ever a whole piece body.
    Inf,
    /// Numerically inverted strictly increasing map applied to the argument.
    Implicit(Arc<ImplicitInverse>, Box<Expr>),
    /// Numeric antiderivative applied to the argument.
    Integral(Arc<NumericIntegral>, Box<Expr>),
}

/// Endpoint of an interval or a set value: a finite variable-free expression
/// or one of the infinities.
#[derive(Clone, Debug, PartialEq)]
pub enum Bound {
    NegInf,
    Finite(Expr),
    PosInf,
}

impl Bound {
    pub fn num(n: Number) -> Bound {
        Bound::Finite(Expr::Num(n))
    }

    pub fn int(n: i64) -> Bound {
        Bound::Finite(Expr::int(n))
    }

    pub fn finite(&self) -> Option<&Expr> {
        match self {
            Bound::Finite(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn neg(&self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Finite(e) => Bound::Finite(simplify(&Expr::neg(e.clone()))),
        }
    }

    pub fn eval(&self, params: &Params) -> Result<ExtReal> {
        match self {
            Bound::NegInf => Ok(ExtReal::NegInf),
            Bound::PosInf => Ok(ExtReal::PosInf),
            Bound::Finite(e) => eval(e, &ExtReal::Finite(Number::zero()), params),
        }
    }

    pub fn eval_f64(&self, params: &ParamsF64) -> Result<f64> {
        match self {
            Bound::NegInf => Ok(f64::NEG_INFINITY),
            Bound::PosInf => Ok(f64::INFINITY),
            Bound::Finite(e) => eval_f64(e, 0.0, params),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Bound::NegInf => "-inf".into(),
            Bound::PosInf => "inf".into(),
            Bound::Finite(e) => e.to_string(),
        }
    }

    /// Order two bounds under the assumptions.
    pub fn compare(&self, other: &Bound, env: &AssumptionEnv) -> Result<Cmp> {
        Ok(match (self, other) {
            (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, Bound::PosInf) => Cmp::Equal,
            (Bound::NegInf, _) | (_, Bound::PosInf) => Cmp::Less,
            (Bound::PosInf, _) | (_, Bound::NegInf) => Cmp::Greater,
            (Bound::Finite(a), Bound::Finite(b)) => compare_exprs(a, b, env)?,
        })
    }

    /// Like [`Bound::compare`] but undecidable orders become errors.
    pub fn cmp_strict(&self, other: &Bound, env: &AssumptionEnv) -> Result<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match self.compare(other, env)? {
            Cmp::Less => Ok(Ordering::Less),
            Cmp::Equal => Ok(Ordering::Equal),
            Cmp::Greater => Ok(Ordering::Greater),
            Cmp::Undecidable => Err(Error::UndecidableComparison(self.text(), other.text())),
        }
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(Number::int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Num(Number::ratio(p, q))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::Num(Number::Rational(r))
    }

    pub fn decimal(v: f64) -> Expr {
        Expr::Num(Number::Decimal(v))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, k: BigRational) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    pub fn powi(a: Expr, k: i64) -> Expr {
        Expr::Pow(Box::new(a), BigRational::from_integer(BigInt::from(k)))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    pub fn ln(a: Expr) -> Expr {
        Expr::Ln(Box::new(a))
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::Abs(Box::new(a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::Sqrt(Box::new(a))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Expr::Inf)
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self {
            Expr::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_) | Expr::Var | Expr::Param(_) | Expr::Inf => vec![],
            Expr::Neg(a) | Expr::Abs(a) | Expr::Exp(a) | Expr::Ln(a) | Expr::Sqrt(a) | Expr::Pow(a, _) => {
                vec![a]
            }
            Expr::Implicit(_, a) | Expr::Integral(_, a) => vec![a],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => vec![a, b],
        }
    }

    /// True if the variable occurs.
    pub fn has_var(&self) -> bool {
        match self {
            Expr::Var => true,
            _ => self.children().into_iter().any(Expr::has_var),
        }
    }

    pub fn has_abs(&self) -> bool {
        match self {
            Expr::Abs(_) => true,
            _ => self.children().into_iter().any(Expr::has_abs),
        }
    }

    pub fn has_inf(&self) -> bool {
        match self {
            Expr::Inf => true,
            _ => self.children().into_iter().any(Expr::has_inf),
        }
    }

    /// True if the tree holds a numeric (non-symbolic) node.
    pub fn is_numeric(&self) -> bool {
        match self {
            Expr::Implicit(..) | Expr::Integral(..) => true,
            _ => self.children().into_iter().any(Expr::is_numeric),
        }
    }

    /// Parameters referenced anywhere, including inside numeric nodes.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Implicit(inv, a) => {
                inv.forward.collect_params(out);
                for b in [&inv.lo, &inv.hi] {
                    if let Bound::Finite(e) = b {
                        e.collect_params(out);
                    }
                }
                a.collect_params(out);
            }
            Expr::Integral(q, a) => {
                q.integrand.collect_params(out);
                q.from.collect_params(out);
                a.collect_params(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_params(out);
                }
            }
        }
    }

    /// Replace the variable by `v`.
    pub fn subst_var(&self, v: &Expr) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var => Some(v.clone()),
            _ => None,
        })
    }

    /// Replace every occurrence of the subtree `target` by `with`.
    pub fn replace(&self, target: &Expr, with: &Expr) -> Expr {
        self.map_leaves(&|e| (e == target).then(|| with.clone()))
    }

    /// The first `abs(u)` whose argument mentions the variable, innermost
    /// occurrences excluded.
    pub fn find_var_abs(&self) -> Option<&Expr> {
        match self {
            Expr::Abs(a) if a.has_var() => Some(self),
            _ => self.children().into_iter().find_map(Expr::find_var_abs),
        }
    }

    /// Replace parameters by bound values.
    pub fn subst_params(&self, params: &Params) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) => params.get(p).map(|r| Expr::rational(r.clone())),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let m = |a: &Expr| Box::new(a.map_leaves(f));
        match self {
            Expr::Num(_) | Expr::Var | Expr::Param(_) | Expr::Inf => self.clone(),
            Expr::Neg(a) => Expr::Neg(m(a)),
            Expr::Abs(a) => Expr::Abs(m(a)),
            Expr::Exp(a) => Expr::Exp(m(a)),
            Expr::Ln(a) => Expr::Ln(m(a)),
            Expr::Sqrt(a) => Expr::Sqrt(m(a)),
            Expr::Pow(a, k) => Expr::Pow(m(a), k.clone()),
            Expr::Add(a, b) => Expr::Add(m(a), m(b)),
            Expr::Sub(a, b) => Expr::Sub(m(a), m(b)),
            Expr::Mul(a, b) => Expr::Mul(m(a), m(b)),
            Expr::Div(a, b) => Expr::Div(m(a), m(b)),
            // The inner map of a numeric node has its own bound variable;
            // only parameters are substituted inside it.
            Expr::Implicit(inv, a) => {
                let inner = Arc::new(inv.map_params(f));
                Expr::Implicit(inner, m(a))
            }
            Expr::Integral(q, a) => {
                let inner = Arc::new(q.map_params(f));
                Expr::Integral(inner, m(a))
            }
        }
    }

    /// Rewrite as a parameter-affine form, if the expression is one.
    pub fn to_linform(&self) -> Option<LinForm> {
        if self.has_var() {
            return None;
        }
        let p = poly::Poly::from_expr(&simplify(self))?;
        p.to_linform()
    }

    /// Value of a parameter-free, variable-free expression.
    pub fn constant_value(&self) -> Option<Number> {
        if self.has_var() || !self.params().is_empty() {
            return None;
        }
        eval_number(self, &Number::zero(), &BTreeMap::new()).ok()
    }
}

impl From<LinForm> for Expr {
    fn from(l: LinForm) -> Expr {
        let mut acc: Option<Expr> = None;
        for (k, v) in &l.coeffs {
            let term = if v.is_one() { Expr::param(k) } else { Expr::mul(Expr::rational(v.clone()), Expr::param(k)) };
            acc = Some(match acc {
                None => term,
                Some(a) => Expr::add(a, term),
            });
        }
        let c = Expr::rational(l.constant.clone());
        simplify(&match acc {
            None => c,
            Some(a) => Expr::add(a, c),
        })
    }
}

/// Convenience for tests and callers that only need a constant.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
