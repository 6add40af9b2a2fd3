//! The expression language.
//!
//! ```text
//! let g = x^2*(1 + x^-1)
//! terms(complog(exp^-1, g), 3)      # 1/g
//! cmp(exp^-1, x^-1)                 # less
//! ```
//!
//! Precedence, tightest first: `^`, unary `-`, `*` `/`, `+` `-`. The right
//! operand of `^` is a rational literal: `x^-1`, `log[2]^-1/2` (no spaces
//! around the `/`), or `x^(-1/2)`.

mod ast;
mod eval;
mod lexer;
mod parser;

use std::io::{BufRead, Write};

pub use ast::{BinOp, Expr, Stmt};
pub use eval::{render, Env, Rendered, Value, FUNCTIONS};
pub use lexer::Pos;
pub use parser::{parse_expr, parse_program, RESERVED};

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::scalar::Scalar;
use crate::series::{Budget, Series};

/// Evaluates a closed expression.
pub fn eval_str(text: &str, env: &Env) -> Result<Value> {
    env.elaborate(&parse_expr(text)?)
}

pub fn parse_series(text: &str, env: &Env) -> Result<Series> {
    eval_str(text, env)?.to_series()
}

/// A monomial in canonical text form, e.g. `exp^-1 * x^2 * log[2]^-1/2`.
pub fn parse_monomial(text: &str) -> Result<Monomial> {
    eval_str(text, &Env::default())?.to_monomial()
}

/// A constant coefficient, e.g. `3/4` or `2*logof(2) - expof(1)`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let v = eval_str(text, &Env::default())?;
    if let Value::Rat(q) = v {
        return Ok(Scalar::from(q));
    }
    let terms = v.to_series()?.terms_prefix(2, &Budget::default())?;
    match terms.as_slice() {
        [] => Ok(Scalar::zero()),
        [t] if t.mono.is_one() => Ok(t.coeff.clone()),
        _ => Err(Error::Type(format!("`{text}` is not a constant"))),
    }
}

/// Canonical text of a value; the inverse of parsing for finite values.
pub fn format_value(v: &Value, env: &Env) -> Result<String> {
    Ok(render(v, env.display_terms, &env.budget)?.text)
}

/// Output settings for [`run_source`] and [`repl`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Output {
    pub json: bool,
}

fn emit(env: &Env, v: &Value, opts: Output, out: &mut dyn Write) -> Result<()> {
    let r = render(v, env.display_terms, &env.budget)?;
    let line = if opts.json { r.json.to_string() } else { r.text };
    writeln!(out, "{line}").map_err(io_error)?;
    match r.budget_hit {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::MalformedInput(format!("i/o: {e}"))
}

/// Runs every statement of `text`, printing the value of each expression
/// statement. Stops at the first error.
pub fn run_source(env: &mut Env, text: &str, opts: Output, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    for stmt in parse_program(text)? {
        let (value, warning) = env.exec(&stmt)?;
        if let Some(w) = warning {
            writeln!(err, "{w}").map_err(io_error)?;
        }
        if let Some(v) = value {
            emit(env, &v, opts, out)?;
        }
    }
    Ok(())
}

pub fn run_script(env: &mut Env, path: &std::path::Path, opts: Output, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))?;
    run_source(env, &text, opts, out, err)
}

const HELP: &str = "\
statements: `let name = expr` or `expr`, separated by `;` or new lines
commands:   :terms N   :vars   :help   :quit
functions:  complog rlog logof expof pow taylor trunc terms ord cmp geom
            almost_regular D germ numeric at";

/// Line-oriented loop. Errors are reported and the loop continues; the
/// number of failed lines is returned.
pub fn repl(env: &mut Env, input: &mut dyn BufRead, prompt: Option<&str>, opts: Output, out: &mut dyn Write, err: &mut dyn Write) -> Result<usize> {
    let mut failures = 0;
    let mut line = String::new();
    loop {
        if let Some(p) = prompt {
            write!(out, "{p}").map_err(io_error)?;
            out.flush().map_err(io_error)?;
        }
        line.clear();
        if input.read_line(&mut line).map_err(io_error)? == 0 {
            return Ok(failures);
        }
        let text = line.trim();
        let result = match text.split_whitespace().collect::<Vec<_>>().as_slice() {
            [":quit"] | [":q"] => return Ok(failures),
            [":help"] => writeln!(out, "{HELP}").map_err(io_error),
            [":vars"] => {
                let names: Vec<&str> = env.names().collect();
                writeln!(out, "{}", names.join(" ")).map_err(io_error)
            }
            [":terms", n] => match n.parse::<usize>() {
                Ok(n) if n > 0 => {
                    env.display_terms = n;
                    Ok(())
                }
                _ => Err(Error::MalformedInput(format!("`{n}` is not a positive count"))),
            },
            [c, ..] if c.starts_with(':') => Err(Error::MalformedInput(format!("unknown command `{c}`; try :help"))),
            _ => run_source(env, text, opts, out, err),
        };
        if let Err(e) = result {
            failures += 1;
            if opts.json {
                writeln!(out, "{}", crate::json::error_to_json(&e)).map_err(io_error)?;
            } else {
                writeln!(err, "error: {e}").map_err(io_error)?;
            }
        }
    }
}

#[cfg(test)]
mod tests;
