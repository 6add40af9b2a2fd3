use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::calculus::nth_derivative;
use crate::composition::{compose_with_log, exp_of, log_of, taylor_compose, taylor_partial};
use crate::error::{Error, Result};
use crate::field::{compose_ps1, divide, power, PowerSeries1};
use crate::json::prefix_to_json;
use crate::monomial::{Level, Monomial};
use crate::numeric::{mono_eval, numeric_of_series, NumericGerm};
use crate::scalar::{format_rational, rational_pow, Rational, Scalar};
use crate::series::{almost_regular, format_terms, Budget, Prefix, Series, Term};

use super::ast::{BinOp, Expr, Stmt};

/// Built-in functions. Their names cannot be rebound.
pub const FUNCTIONS: [&str; 16] = [
    "complog",
    "rlog",
    "logof",
    "expof",
    "pow",
    "taylor",
    "trunc",
    "terms",
    "ord",
    "cmp",
    "geom",
    "almost_regular",
    "D",
    "germ",
    "numeric",
    "at",
];

#[derive(Clone, Debug)]
pub enum Value {
    Rat(Rational),
    Mono(Monomial),
    Series(Series),
    /// An observed prefix, from `terms(F, k)`.
    Prefix(Prefix),
    Cmp(Ordering),
    Germ(NumericGerm),
    Real(f64),
    List(Vec<Value>),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Rat(_) => "rational",
            Value::Mono(_) => "monomial",
            Value::Series(_) => "series",
            Value::Prefix(_) => "prefix",
            Value::Cmp(_) => "comparison",
            Value::Germ(_) => "germ",
            Value::Real(_) => "real",
            Value::List(_) => "list",
        }
    }

    pub fn to_series(&self) -> Result<Series> {
        match self {
            Value::Rat(q) => Ok(Series::constant(q.clone())),
            Value::Mono(m) => Ok(Series::monomial(m.clone())),
            Value::Series(s) => Ok(s.clone()),
            Value::Prefix(p) => Ok(Series::from_terms(p.terms.clone())),
            v => Err(Error::Type(format!("expected a series, found a {}", v.kind()))),
        }
    }

    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Value::Rat(q) => Ok(q.clone()),
            v => Err(Error::Type(format!("expected a rational literal, found a {}", v.kind()))),
        }
    }

    pub fn to_monomial(&self) -> Result<Monomial> {
        match self {
            Value::Mono(m) => Ok(m.clone()),
            Value::Rat(q) if q.is_one() => Ok(Monomial::one()),
            v => Err(Error::Type(format!("expected a monomial, found a {}", v.kind()))),
        }
    }

    fn to_natural(&self) -> Result<usize> {
        let q = self.to_rational()?;
        match q.to_integer().to_usize() {
            Some(n) if q.is_integer() => Ok(n),
            _ => Err(Error::Type(format!("expected a natural number, found {}", format_rational(&q)))),
        }
    }

    fn to_germ(&self) -> Result<NumericGerm> {
        match self {
            Value::Germ(g) => Ok(g.clone()),
            v => Err(Error::Type(format!("expected a germ, found a {}", v.kind()))),
        }
    }
}

/// A value in both output formats.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub text: String,
    pub json: serde_json::Value,
    /// Set when the prefix shown was cut short by the budget.
    pub budget_hit: Option<Error>,
}

fn cmp_word(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn render_prefix(p: Prefix) -> Rendered {
    Rendered {
        text: format_terms(&p.terms, p.exhausted),
        json: prefix_to_json(&p),
        budget_hit: p.budget_hit,
    }
}

/// Renders `v`, observing at most `k` terms of a series.
pub fn render(v: &Value, k: usize, budget: &Budget) -> Result<Rendered> {
    let plain = |text: String, json| Rendered {
        text,
        json,
        budget_hit: None,
    };
    Ok(match v {
        Value::Rat(_) | Value::Mono(_) => render_prefix(v.to_series()?.observe(2, budget)?),
        Value::Series(s) => render_prefix(s.observe(k, budget)?),
        Value::Prefix(p) => render_prefix(p.clone()),
        Value::Cmp(o) => plain(cmp_word(*o).into(), json!({"cmp": cmp_word(*o)})),
        Value::Germ(g) => plain(
            format!("<germ {} for x > {}>", g.label(), g.min_x()),
            json!({"germ": g.label(), "min_x": g.min_x()}),
        ),
        Value::Real(x) => plain(format!("{x:e}"), json!({ "value": x })),
        Value::List(items) => {
            let parts = items.iter().map(|v| render(v, k, budget)).collect::<Result<Vec<_>>>()?;
            let text = format!("[{}]", parts.iter().map(|r| r.text.as_str()).collect::<Vec<_>>().join(", "));
            let budget_hit = parts.iter().find_map(|r| r.budget_hit.clone());
            Rendered {
                text,
                json: serde_json::Value::Array(parts.into_iter().map(|r| r.json).collect()),
                budget_hit,
            }
        }
    })
}

/// Bindings plus observation settings.
#[derive(Clone, Debug)]
pub struct Env {
    vars: BTreeMap<String, Value>,
    pub budget: Budget,
    /// Terms shown when a series is printed.
    pub display_terms: usize,
}

impl Default for Env {
    fn default() -> Self {
        Env::new(Budget::default())
    }
}

impl Env {
    pub fn new(budget: Budget) -> Env {
        Env {
            vars: BTreeMap::new(),
            budget,
            display_terms: 8,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    /// Binds `name`; returns a warning when an earlier binding is shadowed.
    pub fn bind(&mut self, name: &str, v: Value) -> Result<Option<String>> {
        if super::parser::RESERVED.contains(&name) || FUNCTIONS.contains(&name) {
            return Err(Error::Type(format!("`{name}` is reserved")));
        }
        let old = self.vars.insert(name.to_string(), v);
        Ok(old.map(|_| format!("warning: `{name}` rebound; the previous value is shadowed")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    /// Runs one statement. `let` yields no value.
    pub fn exec(&mut self, stmt: &Stmt) -> Result<(Option<Value>, Option<String>)> {
        match stmt {
            Stmt::Let { name, value, .. } => {
                let v = self.elaborate(value)?;
                Ok((None, self.bind(name, v)?))
            }
            Stmt::Expr(e) => Ok((Some(self.elaborate(e)?), None)),
        }
    }

    pub fn elaborate(&self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Num(n) => Ok(Value::Rat(Rational::from_integer(n.clone()))),
            Expr::X => Ok(Value::Mono(Monomial::x())),
            Expr::Exp => Ok(Value::Mono(Monomial::exp_power(Rational::one()))),
            Expr::Log(k) => Ok(Value::Mono(Monomial::factor(Level::log(*k), Rational::one()))),
            Expr::Name(s) => self.vars.get(s).cloned().ok_or_else(|| Error::UnboundName(s.clone())),
            Expr::Neg(a) => neg(self.elaborate(a)?),
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.elaborate(a)?, self.elaborate(b)?);
                match op {
                    BinOp::Add => add(a, b),
                    BinOp::Sub => add(a, neg(b)?),
                    BinOp::Mul => mul(a, b),
                    BinOp::Div => div(a, b, &self.budget),
                }
            }
            Expr::Pow(a, r) => pow(self.elaborate(a)?, r, &self.budget),
            Expr::List(items) => Ok(Value::List(items.iter().map(|e| self.elaborate(e)).collect::<Result<_>>()?)),
            Expr::Call(name, args) => self.call(name, args).map_err(|e| match e {
                e @ (Error::UnboundName(_) | Error::Syntax { .. }) => e,
                e => Error::InOperation {
                    op: name.clone(),
                    source: Box::new(e),
                },
            }),
        }
    }

    fn call(&self, name: &str, args: &[Expr]) -> Result<Value> {
        let b = &self.budget;
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                let want = if lo == hi { lo.to_string() } else { format!("{lo} to {hi}") };
                return Err(Error::Type(format!("{name} takes {want} arguments, got {}", args.len())));
            }
            Ok(())
        };
        if name == "germ" {
            arity(1, 1)?;
            let label = match &args[0] {
                Expr::Name(s) => s.clone(),
                Expr::X => "x".into(),
                Expr::Exp => "exp".into(),
                Expr::Log(1) => "log".into(),
                e => return Err(Error::Type(format!("germ expects a builtin name, found `{e}`"))),
            };
            return Ok(Value::Germ(NumericGerm::builtin(&label)?));
        }
        let vals = args.iter().map(|e| self.elaborate(e)).collect::<Result<Vec<_>>>()?;
        let series = |i: usize| vals[i].to_series();
        let out = match name {
            "complog" => {
                arity(2, 2)?;
                Value::Series(compose_with_log(&series(0)?, &series(1)?, b)?)
            }
            "rlog" => {
                arity(1, 1)?;
                Value::Series(series(0)?.shift_log())
            }
            "logof" => {
                arity(1, 1)?;
                Value::Series(log_of(&series(0)?, b)?)
            }
            "expof" => {
                arity(1, 1)?;
                Value::Series(exp_of(&series(0)?, b)?)
            }
            "pow" => {
                arity(2, 2)?;
                pow(vals[0].clone(), &vals[1].to_rational()?, b)?
            }
            "taylor" => {
                arity(3, 4)?;
                let (f, g, h) = (series(0)?, series(1)?, series(2)?);
                match vals.get(3) {
                    Some(n) => Value::Series(taylor_partial(&f, &g, &h, n.to_natural()?, b)?),
                    None => Value::Series(taylor_compose(&f, &g, &h, b)?),
                }
            }
            "trunc" => {
                arity(2, 2)?;
                Value::Series(series(0)?.truncate_above(&vals[1].to_monomial()?))
            }
            "terms" => {
                arity(2, 2)?;
                let p = series(0)?.observe(vals[1].to_natural()?, b)?;
                if let Some(e) = p.budget_hit {
                    return Err(e);
                }
                Value::Prefix(p)
            }
            "ord" => {
                arity(1, 1)?;
                Value::Rat(series(0)?.exp_order(b)?)
            }
            "cmp" => {
                arity(2, 2)?;
                Value::Cmp(vals[0].to_monomial()?.cmp(&vals[1].to_monomial()?))
            }
            "geom" => {
                arity(1, 1)?;
                Value::Series(compose_ps1(&PowerSeries1::geom(), &series(0)?, b)?)
            }
            "almost_regular" => {
                let mut rows = Vec::with_capacity(vals.len());
                for v in &vals {
                    let Value::List(items) = v else {
                        return Err(Error::Type("almost_regular takes rows [ν, c0, c1, ...]".into()));
                    };
                    let row = items.iter().map(Value::to_rational).collect::<Result<Vec<_>>>()?;
                    let (nu, poly) = row
                        .split_first()
                        .ok_or_else(|| Error::Type("empty almost_regular row".into()))?;
                    rows.push((nu.clone(), poly.to_vec()));
                }
                Value::Series(almost_regular(&rows, false)?)
            }
            "D" => {
                arity(1, 2)?;
                let i = match vals.get(1) {
                    Some(v) => v.to_natural()?,
                    None => 1,
                };
                Value::Series(nth_derivative(&series(0)?, i))
            }
            "numeric" => {
                arity(2, 2)?;
                Value::Germ(numeric_of_series(&series(0)?, vals[1].to_natural()?, b)?)
            }
            "at" => {
                arity(2, 2)?;
                let x = vals[1].to_rational()?;
                let x = Scalar::from(x).to_f64();
                match &vals[0] {
                    Value::Mono(m) => Value::Real(mono_eval(m, x)?),
                    v => Value::Real(v.to_germ()?.eval(x)?),
                }
            }
            _ => return Err(Error::UnboundName(format!("{name}(...)"))),
        };
        Ok(out)
    }
}

fn neg(a: Value) -> Result<Value> {
    match a {
        Value::Rat(q) => Ok(Value::Rat(-q)),
        v => Ok(Value::Series(v.to_series()?.negate())),
    }
}

fn add(a: Value, b: Value) -> Result<Value> {
    match (a, b) {
        (Value::Rat(p), Value::Rat(q)) => Ok(Value::Rat(p + q)),
        (a, b) => Ok(Value::Series(a.to_series()?.add(&b.to_series()?))),
    }
}

fn mul(a: Value, b: Value) -> Result<Value> {
    match (a, b) {
        (Value::Rat(p), Value::Rat(q)) => Ok(Value::Rat(p * q)),
        (Value::Mono(m), Value::Mono(n)) => Ok(Value::Mono(m.mul(&n))),
        (Value::Rat(q), Value::Mono(m)) | (Value::Mono(m), Value::Rat(q)) => {
            Ok(Value::Series(Series::from_terms([Term::new(q, m)])))
        }
        (Value::Rat(q), v) | (v, Value::Rat(q)) => Ok(Value::Series(v.to_series()?.scalar_mul_rational(&q))),
        (Value::Mono(m), v) | (v, Value::Mono(m)) => Ok(Value::Series(v.to_series()?.mul_monomial(&m))),
        (a, b) => Ok(Value::Series(a.to_series()?.mul(&b.to_series()?))),
    }
}

fn div(a: Value, b: Value, budget: &Budget) -> Result<Value> {
    match (a, b) {
        (_, Value::Rat(q)) if q.is_zero() => Err(Error::DivisionByZero),
        (Value::Rat(p), Value::Rat(q)) => Ok(Value::Rat(p / q)),
        (Value::Mono(m), Value::Mono(n)) => Ok(Value::Mono(m.div(&n))),
        (a, Value::Rat(q)) => mul(a, Value::Rat(q.recip())),
        (a, Value::Mono(m)) => mul(a, Value::Mono(m.inv())),
        (a, b) => Ok(Value::Series(
            divide(&a.to_series()?, &b.to_series()?, budget).map_err(|e| e.in_op("divide"))?,
        )),
    }
}

fn pow(a: Value, r: &Rational, budget: &Budget) -> Result<Value> {
    match a {
        Value::Rat(q) => rational_pow(&q, r).map(Value::Rat).ok_or_else(|| {
            Error::IrrationalScalar(format!("{}^{} is not rational", format_rational(&q), format_rational(r)))
        }),
        Value::Mono(m) => Ok(Value::Mono(m.pow(r))),
        v => {
            let s = v.to_series()?;
            let small = r.is_integer().then(|| r.to_integer().abs().to_u32()).flatten().filter(|n| *n <= 64);
            let out = match small {
                Some(n) if !r.is_negative() => Ok(s.powi(n)),
                Some(n) => divide(&Series::constant(1), &s.powi(n), budget),
                None => power(&s, r, budget),
            }
            .map_err(|e| e.in_op("power"));
            out.map(Value::Series)
        }
    }
}
