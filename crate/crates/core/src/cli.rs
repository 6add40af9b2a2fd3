//! The `logfield` command line.
//!
//! ```text
//! logfield eval "terms(1/(1-x^-1), 4)" --json
//! logfield check-asymptotic --germ geom --series "geom(x^-1)" --mono "x^-3" --grid 100,1000
//! logfield run script.lf
//! logfield repl
//! logfield selftest --scale 0.1
//! ```

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::dsl::{self, Env, Output};
use crate::error::{Error, Result};
use crate::json::error_to_json;
use crate::numeric::{check_o, mono_threshold, EvalGrid, NumericGerm};
use crate::selftest;
use crate::series::Budget;

#[derive(Parser, Debug)]
#[command(name = "logfield", version, about = "Logarithmic generalized power series workbench")]
pub struct Cli {
    /// Largest number of terms any series may memoize.
    #[arg(long, global = true)]
    pub max_terms: Option<usize>,
    /// Producer steps allowed per observation.
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    /// Machine-readable output (prefix and error JSON).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Interactive loop over standard input.
    Repl {
        /// Terms shown per series.
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Evaluates statements and prints each expression's value.
    Eval {
        expr: String,
        /// Terms shown per series.
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Runs a script file.
    Run {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Ratios |f − F_n| / n on a grid, as JSON.
    CheckAsymptotic {
        /// Builtin germ: x, one, exp, log, loglog, geom, expinv, sqrt1p.
        #[arg(long)]
        germ: String,
        #[arg(long)]
        series: String,
        #[arg(long)]
        mono: String,
        /// Comma-separated points; default 100,1000,10000 above the thresholds.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Runs the property suites.
    Selftest {
        /// Fraction of the full case counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 20_240_917)]
        seed: u64,
        /// Append elapsed times (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
}

/// Standard streams, injectable for tests.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdin_is_terminal: bool,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

fn budget(cli: &Cli, env_budget: Option<&str>) -> Result<Budget> {
    let base = match env_budget {
        Some(s) => Budget::parse(s)?,
        None => Budget::default(),
    };
    Budget::new(cli.max_terms.unwrap_or(base.max_terms), cli.max_steps.unwrap_or(base.max_steps))
}

fn env_with(budget: Budget, terms: usize) -> Result<Env> {
    if terms == 0 {
        return Err(Error::MalformedInput("--terms must be positive".into()));
    }
    let mut env = Env::default();
    env.budget = budget;
    env.display_terms = terms;
    Ok(env)
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code. `env_budget` is the value of `LOGFIELD_BUDGET`, if set.
pub fn run(args: impl IntoIterator<Item = String>, env_budget: Option<&str>, io: Io<'_>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.err } else { io.out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let json = cli.json;
    let Io { stdin, stdin_is_terminal, out, err } = io;
    match execute(&cli, env_budget, stdin, stdin_is_terminal, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = if json {
                writeln!(out, "{}", error_to_json(&e))
            } else {
                writeln!(err, "error: {e}")
            };
            1
        }
    }
}

fn execute(
    cli: &Cli,
    env_budget: Option<&str>,
    stdin: &mut dyn BufRead,
    stdin_is_terminal: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let budget = budget(cli, env_budget)?;
    let opts = Output { json: cli.json };
    match &cli.command {
        Command::Eval { expr, terms } => {
            let mut env = env_with(budget, *terms)?;
            dsl::run_source(&mut env, expr, opts, out, err)?;
            Ok(0)
        }
        Command::Run { path, terms } => {
            let mut env = env_with(budget, *terms)?;
            dsl::run_script(&mut env, path, opts, out, err)?;
            Ok(0)
        }
        Command::Repl { terms } => {
            let mut env = env_with(budget, *terms)?;
            let prompt = stdin_is_terminal.then_some("> ");
            let failures = dsl::repl(&mut env, stdin, prompt, opts, out, err)?;
            Ok(i32::from(failures > 0))
        }
        Command::CheckAsymptotic { germ, series, mono, grid } => {
            let env = env_with(budget, 8)?;
            let f = NumericGerm::builtin(germ)?;
            let s = dsl::parse_series(series, &env)?;
            let n = dsl::parse_monomial(mono)?;
            let grid = match grid {
                Some(text) => EvalGrid::parse(text)?,
                None => EvalGrid::default_above(f.min_x().max(mono_threshold(&n)))?,
            };
            let report = check_o(&f, &s, &n, &grid, &budget)?;
            writeln!(out, "{}", report.to_json()).map_err(io_error)?;
            Ok(0)
        }
        Command::Selftest { scale, seed, timings } => {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(Error::MalformedInput("--scale must be positive".into()));
            }
            let results = selftest::quick_parallel(*seed, *scale);
            for r in &results {
                let line = if *timings { r.line() } else { r.summary() };
                writeln!(out, "{line}").map_err(io_error)?;
            }
            Ok(i32::from(!results.iter().all(selftest::SuiteResult::passed)))
        }
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::MalformedInput(format!("i/o: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut input = stdin.as_bytes();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("logfield").chain(args.iter().copied()).map(String::from),
            None,
            Io {
                stdin: &mut input,
                stdin_is_terminal: false,
                out: &mut out,
                err: &mut err,
            },
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval() {
        assert_eq!(call(&["eval", "terms(D(log), 1)"], ""), (0, "x^-1\n".into(), String::new()));
        let (code, out, _) = call(&["eval", "terms(1/(1-x^-1), 4)", "--json"], "");
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let coeffs: Vec<&str> = v["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
        assert_eq!(coeffs, ["1", "1", "1", "1"]);
    }

    #[test]
    fn errors() {
        let (code, out, err) = call(&["eval", "geom(x)"], "");
        assert_eq!((code, out.as_str()), (1, ""));
        assert!(err.starts_with("error: geom: "), "{err}");
        let (code, out, _) = call(&["--json", "eval", "1 +"], "");
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["error"], "SyntaxError");
        let (code, out, _) = call(&["eval", "terms(geom(x^-1), 50)", "--max-steps", "10", "--json"], "");
        assert_eq!(code, 1);
        assert!(out.contains("BudgetExhausted"), "{out}");
        assert_eq!(call(&["bogus"], "").0, 2);
    }

    #[test]
    fn check_asymptotic() {
        let (code, out, _) = call(
            &["check-asymptotic", "--germ", "geom", "--series", "geom(x^-1)", "--mono", "x^-3", "--grid", "100,1000"],
            "",
        );
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "pass");
        assert_eq!(v["decreasing"], true);
    }

    #[test]
    fn repl_exit_code() {
        let (code, out, _) = call(&["repl", "--terms", "2"], "1/(1 - x^-1)\n");
        assert_eq!((code, out.as_str()), (0, "1 + x^-1 + ...\n"));
        assert_eq!(call(&["repl"], "nope\n").0, 1);
    }

    #[test]
    fn deterministic() {
        let args = ["eval", "let g = x^2*(1+x^-1); complog(exp^-1, g); cmp(exp^-1, x^-1)", "--json"];
        assert_eq!(call(&args, ""), call(&args, ""));
        let st = ["selftest", "--scale", "0.002", "--seed", "3"];
        let first = call(&st, "");
        assert_eq!(first.0, 0, "{}", first.1);
        assert_eq!(first, call(&st, ""));
    }
}
