//! Command-line front end.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::conv::{biconjugate, conjugate};
use crate::dsl::parse_env;
use crate::env::AssumptionEnv;
use crate::error::{Error, Result};
use crate::expr::{eval_number, params_f64, parse_expr, Expr, Params};
use crate::monop::{
    eval_op, invert, maximal_extension, parse_op, prox, resolvent, subdifferential, MonotoneOperator, SetValue,
};
use crate::number::{decimal_to_rational, ExtReal, Number};
use crate::oracle::{grid_conjugate, monotonicity_check, numeric_prox};
use crate::output::{ext_str, op_json, pwf_json, set_json, to_value};
use crate::penalty::{recover_penalty, verify_penalty};
use crate::pwf::{parse_pwf, PiecewiseFunction};
use crate::risk::{
    cvar, quantile, superdistribution, superexpectation, superexpectation_conjugate, superquantile, DistributionSpec,
};
use crate::sep::{separable_conjugate, separable_prox, SeparableFunction};

#[derive(Parser, Debug)]
#[command(name = "symconvex", version, about = "Symbolic convex analysis of piecewise functions on the real line")]
struct Cli {
    /// Assumption on parameters, e.g. "0 < l" (repeatable).
    #[arg(long = "assume", global = true, value_name = "REL")]
    assume: Vec<String>,
    /// Numeric parameter value, e.g. alpha=1 (repeatable).
    #[arg(long = "param", global = true, value_name = "NAME=VALUE")]
    param: Vec<String>,
    /// Step size for prox and resolvent.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Subdifferential of a function.
    Subdiff {
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Convex conjugate.
    Conj {
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Conjugate of the conjugate.
    Biconj {
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Proximity operator; `--at` evaluates it at a point or vector.
    Prox {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Inverse of an operator.
    Invert {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Resolvent of an operator.
    Resolvent {
        #[arg(allow_hyphen_values = true)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Maximal monotone extension of an operator.
    Extend {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Penalty whose prox extends the operator.
    Penalty {
        #[arg(allow_hyphen_values = true)]
        op: String,
        /// Also check the result by sampling.
        #[arg(long)]
        verify: bool,
    },
    /// Superexpectation and related quantities of a distribution.
    Risk {
        /// Distribution function in x.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "quantile", conflicts_with = "quantile")]
        cdf: Option<String>,
        /// Quantile function in p.
        #[arg(long, allow_hyphen_values = true)]
        quantile: Option<String>,
        #[command(subcommand)]
        what: RiskCmd,
    },
    /// Value of a function, or of an operator, at a point.
    Eval {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// Cross-check conjugate, prox and monotonicity against numeric oracles.
    Verify {
        #[arg(allow_hyphen_values = true)]
        f: String,
        /// Grid size for the conjugate check.
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RiskCmd {
    /// Superexpectation E(x) = E[max(x, X)].
    Superexp,
    /// Subdifferential of the superexpectation.
    Superdist,
    /// Conjugate of the superexpectation.
    Conj,
    /// Superquantile at level p in (0,1).
    Superq {
        #[arg(allow_hyphen_values = true)]
        p: String,
    },
    /// Conditional value-at-risk, the same as superq.
    Cvar {
        #[arg(allow_hyphen_values = true)]
        p: String,
    },
    /// Lower quantile at level p in (0,1).
    Quantile {
        #[arg(allow_hyphen_values = true)]
        p: String,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Out {
    Pwf(PiecewiseFunction),
    Op(MonotoneOperator),
    List(Vec<Out>),
    Value(ExtReal),
    Set(SetValue),
    /// Text and JSON prepared by the command.
    Raw(String, Value),
    Failed(String, Value),
}

struct Ctx {
    env: AssumptionEnv,
    params: Params,
    declared: BTreeSet<String>,
}

impl Ctx {
    /// Reject identifiers that are neither the variable nor declared.
    fn declared(&self, text: &str, used: BTreeSet<String>) -> Result<()> {
        for p in used {
            if !self.declared.contains(&p) {
                return Err(Error::Syntax {
                    offset: ident_offset(text, &p),
                    expected: vec!["declared parameter".into()],
                });
            }
        }
        Ok(())
    }

    fn pwf(&self, text: &str) -> Result<PiecewiseFunction> {
        let f = parse_pwf(text, &self.env)?;
        self.declared(text, pwf_params(&f))?;
        Ok(f)
    }

    fn sep(&self, text: &str) -> Result<SeparableFunction> {
        let f = SeparableFunction::parse(text, &self.env)?;
        for g in &f.coords {
            self.declared(text, pwf_params(g))?;
        }
        Ok(f)
    }

    fn op(&self, text: &str) -> Result<MonotoneOperator> {
        let t = parse_op(text, &self.env)?;
        self.declared(text, op_params(&t))?;
        Ok(t)
    }

    fn expr(&self, text: &str) -> Result<Expr> {
        let e = parse_expr(text)?;
        self.declared(text, e.params())?;
        Ok(e)
    }

    fn number(&self, text: &str) -> Result<Number> {
        eval_number(&self.expr(text)?, &Number::zero(), &self.params)
    }

    fn vector(&self, text: &str) -> Result<Vec<Number>> {
        text.split(',').map(|s| self.number(s.trim())).collect()
    }

    fn lambda(&self, text: &Option<String>) -> Result<Expr> {
        match text {
            Some(t) => self.expr(t),
            None => Ok(Expr::int(1)),
        }
    }
}

fn ident_offset(text: &str, name: &str) -> usize {
    let b = text.as_bytes();
    let word = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    let mut from = 0;
    while let Some(k) = text[from..].find(name) {
        let at = from + k;
        let end = at + name.len();
        if (at == 0 || !word(b[at - 1])) && (end == b.len() || !word(b[end])) {
            return at;
        }
        from = at + 1;
    }
    0
}

fn pwf_params(f: &PiecewiseFunction) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for e in f.breakpoints.iter().chain(&f.values).chain(f.pieces.iter().map(|p| &p.body)) {
        s.extend(e.params());
    }
    s
}

fn op_params(t: &MonotoneOperator) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for e in &t.breakpoints {
        s.extend(e.params());
    }
    for p in &t.pieces {
        if let Some(b) = p.body() {
            s.extend(b.params());
        }
    }
    for v in &t.values {
        if let Some((a, b)) = v.bounds() {
            for e in [a.finite(), b.finite()].into_iter().flatten() {
                s.extend(e.params());
            }
        }
    }
    s
}

fn parse_param(text: &str) -> Result<(String, num_rational::BigRational)> {
    let bad = || Error::Syntax { offset: 0, expected: vec!["NAME=VALUE".into()] };
    let (name, value) = text.split_once('=').ok_or_else(bad)?;
    let value = value.trim();
    let r = match value.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (decimal_to_rational(p.trim()), decimal_to_rational(q.trim()));
            match (p, q) {
                (Some(p), Some(q)) if !num_traits::Zero::is_zero(&q) => p / q,
                _ => return Err(Error::Syntax { offset: name.len() + 1, expected: vec!["number".into()] }),
            }
        }
        None => decimal_to_rational(value)
            .ok_or(Error::Syntax { offset: name.len() + 1, expected: vec!["number".into()] })?,
    };
    Ok((name.trim().to_string(), r))
}

fn is_separable(text: &str) -> bool {
    text.contains(";;")
}

fn execute(cli: &Cli) -> Result<Out> {
    let env = parse_env(&cli.assume)?;
    let mut params = Params::new();
    for p in &cli.param {
        let (k, v) = parse_param(p)?;
        params.insert(k, v);
    }
    let mut declared: BTreeSet<String> = env.params().into_iter().collect();
    declared.extend(params.keys().cloned());
    let ctx = Ctx { env, params, declared };
    Ok(match &cli.cmd {
        Cmd::Subdiff { f } if is_separable(f) => {
            Out::List(ctx.sep(f)?.coords.iter().map(|g| subdifferential(g).map(Out::Op)).collect::<Result<_>>()?)
        }
        Cmd::Subdiff { f } => Out::Op(subdifferential(&ctx.pwf(f)?)?),
        Cmd::Conj { f } if is_separable(f) => {
            Out::List(separable_conjugate(&ctx.sep(f)?)?.coords.into_iter().map(Out::Pwf).collect())
        }
        Cmd::Conj { f } => Out::Pwf(conjugate(&ctx.pwf(f)?)?),
        Cmd::Biconj { f } if is_separable(f) => {
            let c = separable_conjugate(&separable_conjugate(&ctx.sep(f)?)?)?;
            Out::List(c.coords.into_iter().map(Out::Pwf).collect())
        }
        Cmd::Biconj { f } => Out::Pwf(biconjugate(&ctx.pwf(f)?)?),
        Cmd::Prox { f, at } => {
            let lambda = ctx.lambda(&cli.lambda)?;
            match at {
                Some(at) => {
                    let g = ctx.sep(f)?;
                    let x = ctx.vector(at)?;
                    let vals = separable_prox(&g, &lambda, &x, &ctx.params)?;
                    if vals.len() == 1 {
                        Out::Set(vals.into_iter().next().unwrap())
                    } else {
                        Out::List(vals.into_iter().map(Out::Set).collect())
                    }
                }
                None if is_separable(f) => {
                    Out::List(ctx.sep(f)?.coords.iter().map(|g| prox(g, &lambda).map(Out::Op)).collect::<Result<_>>()?)
                }
                None => Out::Op(prox(&ctx.pwf(f)?, &lambda)?),
            }
        }
        Cmd::Invert { op } => Out::Op(invert(&ctx.op(op)?)?),
        Cmd::Resolvent { op, at } => {
            let r = resolvent(&ctx.op(op)?, &ctx.lambda(&cli.lambda)?)?;
            match at {
                Some(at) => Out::Set(eval_op(&r, &ExtReal::Finite(ctx.number(at)?), &ctx.params)?),
                None => Out::Op(r),
            }
        }
        Cmd::Extend { op } => Out::Op(maximal_extension(&ctx.op(op)?)?),
        Cmd::Penalty { op, verify } => {
            let t = ctx.op(op)?;
            let f = recover_penalty(&t)?;
            if !*verify {
                Out::Pwf(f)
            } else {
                let rep = verify_penalty(&t, &f, &params_f64(&ctx.params))?;
                let text = format!(
                    "{f}\nverify: {} (max violation {:e} over {} points)",
                    if rep.pass { "pass" } else { "FAIL" },
                    rep.max_violation,
                    rep.points
                );
                let v = json!({
                    "penalty": to_value(&pwf_json(&f)),
                    "verify": {"pass": rep.pass, "max_violation": rep.max_violation, "points": rep.points, "witness": rep.witness},
                });
                if rep.pass {
                    Out::Raw(text, v)
                } else {
                    Out::Failed(text, v)
                }
            }
        }
        Cmd::Risk { cdf, quantile: q, what } => {
            let d = match (cdf, q) {
                (Some(c), _) => {
                    let d = DistributionSpec::cdf(c, &ctx.env)?;
                    if let crate::risk::Distribution::Cdf(f) = &d.dist {
                        ctx.declared(c, pwf_params(f))?;
                    }
                    d
                }
                (None, Some(q)) => {
                    let d = DistributionSpec::quantile(q, &ctx.env)?;
                    if let crate::risk::Distribution::Quantile(e) = &d.dist {
                        ctx.declared(q, e.params())?;
                    }
                    d
                }
                (None, None) => {
                    return Err(Error::Syntax { offset: 0, expected: vec!["--cdf".into(), "--quantile".into()] })
                }
            };
            match what {
                RiskCmd::Superexp => Out::Pwf(superexpectation(&d)?),
                RiskCmd::Superdist => Out::Op(superdistribution(&d)?),
                RiskCmd::Conj => Out::Pwf(superexpectation_conjugate(&d)?),
                RiskCmd::Superq { p } => Out::Value(superquantile(&d, &ctx.number(p)?, &ctx.params)?),
                RiskCmd::Cvar { p } => Out::Value(cvar(&d, &ctx.number(p)?, &ctx.params)?),
                RiskCmd::Quantile { p } => Out::Value(quantile(&d, &ctx.number(p)?, &ctx.params)?),
            }
        }
        Cmd::Eval { f, x } => {
            let at = ExtReal::Finite(ctx.number(x)?);
            let t = f.trim_start();
            if t.starts_with("sd") || t.starts_with('{') || t.starts_with('[') {
                Out::Set(eval_op(&ctx.op(f)?, &at, &ctx.params)?)
            } else {
                Out::Value(ctx.pwf(f)?.eval(&at, &ctx.params)?)
            }
        }
        Cmd::Verify { f, grid } => verify(&ctx, &ctx.pwf(f)?, *grid)?,
    })
}

/// Symbolic results against the oracles; see the module docs of `oracle`.
fn verify(ctx: &Ctx, f: &PiecewiseFunction, grid: usize) -> Result<Out> {
    let w = params_f64(&ctx.params);
    let mut text = String::new();
    let mut all_ok = true;
    let mut checks = Vec::new();
    let mut record = |name: &str, worst: f64, n: usize, ok: bool, text: &mut String| {
        all_ok &= ok;
        let _ = writeln!(text, "{name}: {} (worst {worst:e} over {n} points)", if ok { "pass" } else { "FAIL" });
        checks.push(json!({"check": name, "pass": ok, "worst": worst, "points": n}));
    };
    // Conjugate values at y whose maximizer lies inside the window.
    let c = conjugate(f)?;
    let dc = subdifferential(&c)?;
    let h = 20.0 / (grid.max(2) - 1) as f64;
    let (mut worst, mut n, mut ok) = (0f64, 0, true);
    for k in 0..=40 {
        let y = -5.0 + 10.0 * k as f64 / 40.0;
        let cy = c.eval_f64(y, &w)?;
        let inside = matches!(dc.eval_f64(y, &w)?, Some((lo, hi)) if lo.max(-10.0) <= hi.min(10.0));
        if !cy.is_finite() || !inside {
            continue;
        }
        let err = (cy - grid_conjugate(f, y, (-10.0, 10.0), grid, &w)?).abs();
        ok &= err <= f64::max(1e-6, h * (1.0 + y.abs()));
        worst = worst.max(err);
        n += 1;
    }
    record("conjugate vs grid", worst, n, ok, &mut text);
    let p = prox(f, &Expr::int(1))?;
    let (mut worst, mut n) = (0f64, 0);
    for k in 0..=40 {
        let x = -5.0 + 10.0 * k as f64 / 40.0;
        if let Some((u, _)) = p.eval_f64(x, &w)? {
            worst = worst.max((u - numeric_prox(f, x, 1.0, 1e-12, &w)?).abs());
            n += 1;
        }
    }
    record("prox vs golden section", worst, n, worst <= 1e-6, &mut text);
    for (name, t) in [("subdifferential monotone", subdifferential(f)?), ("prox monotone", p)] {
        let m = monotonicity_check(&t, 500, &w)?;
        record(name, m.min_product.min(0.0).abs(), m.pairs, m.min_product >= -1e-12, &mut text);
    }
    let v = json!({"checks": checks, "pass": all_ok});
    let text = text.trim_end().to_string();
    Ok(if all_ok { Out::Raw(text, v) } else { Out::Failed(text, v) })
}

fn render_text(o: &Out) -> String {
    match o {
        Out::Pwf(f) => f.to_string(),
        Out::Op(t) => t.to_string(),
        Out::List(v) => v.iter().map(render_text).collect::<Vec<_>>().join("\n;;\n"),
        Out::Value(v) => ext_str(v),
        Out::Set(s) => match s.bounds() {
            Some(_) => set_text(s),
            None => "empty".into(),
        },
        Out::Raw(t, _) | Out::Failed(t, _) => t.clone(),
    }
}

fn set_text(s: &SetValue) -> String {
    let j = set_json(s);
    match j.ty {
        "point" => format!("{{{}}}", j.lo.unwrap()),
        "interval" => format!("[{}, {}]", j.lo.unwrap(), j.hi.unwrap()),
        other => other.to_string(),
    }
}

fn render_json(o: &Out) -> Value {
    match o {
        Out::Pwf(f) => to_value(&pwf_json(f)),
        Out::Op(t) => to_value(&op_json(t)),
        Out::List(v) => Value::Array(v.iter().map(render_json).collect()),
        Out::Value(v) => json!({"kind": "value", "value": ext_str(v)}),
        Out::Set(s) => json!({"kind": "set", "value": to_value(&set_json(s))}),
        Out::Raw(_, v) | Out::Failed(_, v) => v.clone(),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_internal() {
        3
    } else {
        2
    }
}

/// Parse `argv` (program name first), run, and report.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let code = if matches!(out, Out::Failed(..)) { 3 } else { 0 };
            let stdout = if cli.json {
                serde_json::to_string_pretty(&render_json(&out)).expect("json values serialize")
            } else {
                render_text(&out)
            };
            Outcome { code, stdout: stdout + "\n", stderr: String::new() }
        }
        Err(e) => {
            let stderr = format!("error[{}]: {e}\n", e.code());
            let stdout = if cli.json {
                json!({"error": {"code": e.code(), "message": e.to_string()}}).to_string() + "\n"
            } else {
                String::new()
            };
            Outcome { code: exit_code(&e), stdout, stderr }
        }
    }
}
