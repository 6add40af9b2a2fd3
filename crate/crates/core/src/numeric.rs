//! Real-axis evaluation: monomials, truncations, germs, finite differences
//! and the `o(n)` ratio check.

use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::real::Real;
use crate::series::{Budget, Series, Term};

/// `e_k` with `e_0 = 0` and `e_k = exp(e_{k-1})`: every `log_j` with
/// `j ≤ k` is positive above it. Level `-1` needs no threshold.
pub fn threshold(level: i32) -> f64 {
    if level < 0 {
        return f64::NEG_INFINITY;
    }
    (0..level).fold(0.0, |e, _| f64::exp(e))
}

/// Threshold for a monomial: that of its highest level.
pub fn mono_threshold(m: &Monomial) -> f64 {
    m.max_level().map_or(f64::NEG_INFINITY, |l| threshold(l.get()))
}

fn check_above(x: &Real, min_x: f64) -> Result<()> {
    if min_x.is_finite() && *x <= Real::from_f64(min_x) {
        return Err(Error::BelowThreshold {
            x: x.to_f64(),
            threshold: min_x,
        });
    }
    Ok(())
}

/// `Π log_i(x)^{r_i}` in extended precision.
pub fn mono_eval_real(m: &Monomial, x: &Real) -> Result<Real> {
    check_above(x, mono_threshold(m))?;
    let mut out = Real::one();
    let mut logs = x.clone();
    let mut level = 0;
    for (l, r) in m.exps() {
        if l.get() < 0 {
            out = out * (x * &Real::from_rational(r)).exp();
            continue;
        }
        while level < l.get() {
            logs = logs.ln();
            level += 1;
        }
        out = out * logs.powr(r);
    }
    Ok(out)
}

pub fn mono_eval(m: &Monomial, x: f64) -> Result<f64> {
    Ok(mono_eval_real(m, &Real::from_f64(x))?.to_f64())
}

pub fn term_eval_real(t: &Term, x: &Real) -> Result<Real> {
    Ok(t.coeff.to_real() * mono_eval_real(&t.mono, x)?)
}

/// Sum of the given terms at `x`.
pub fn terms_eval_real(terms: &[Term], x: &Real) -> Result<Real> {
    terms.iter().try_fold(Real::zero(), |acc, t| Ok(acc + term_eval_real(t, x)?))
}

/// The first `k` terms of `F` evaluated at `x`.
pub fn series_eval_prefix(f: &Series, k: usize, x: f64, budget: &Budget) -> Result<f64> {
    let terms = f.terms_prefix(k, budget)?;
    Ok(terms_eval_real(&terms, &Real::from_f64(x))?.to_f64())
}

type Eval = Arc<dyn Fn(&Real) -> Result<Real> + Send + Sync>;

/// A real function valid above `min_x`.
#[derive(Clone)]
pub struct NumericGerm {
    label: String,
    eval: Eval,
    min_x: f64,
}

impl fmt::Debug for NumericGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumericGerm({}, x > {})", self.label, self.min_x)
    }
}

impl NumericGerm {
    pub fn new(label: impl Into<String>, min_x: f64, eval: impl Fn(&Real) -> Result<Real> + Send + Sync + 'static) -> Self {
        NumericGerm {
            label: label.into(),
            eval: Arc::new(eval),
            min_x,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min_x(&self) -> f64 {
        self.min_x
    }

    pub fn eval_real(&self, x: &Real) -> Result<Real> {
        check_above(x, self.min_x)?;
        (self.eval)(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_real(&Real::from_f64(x))?.to_f64())
    }

    pub const BUILTINS: [&'static str; 8] = ["x", "one", "exp", "log", "loglog", "geom", "expinv", "sqrt1p"];

    /// Named germs for the command line: `x`, `one`, `exp`, `log`, `loglog`,
    /// `geom` = 1/(1 − 1/x), `expinv` = e^{1/x}, `sqrt1p` = √(x + 1).
    pub fn builtin(name: &str) -> Result<NumericGerm> {
        let g = match name {
            "x" => NumericGerm::new(name, f64::NEG_INFINITY, |x| Ok(x.clone())),
            "one" => NumericGerm::new(name, f64::NEG_INFINITY, |_| Ok(Real::one())),
            "exp" => NumericGerm::new(name, f64::NEG_INFINITY, |x| Ok(x.exp())),
            "log" => NumericGerm::new(name, 0.0, |x| Ok(x.ln())),
            "loglog" => NumericGerm::new(name, 1.0, |x| Ok(x.ln().ln())),
            "geom" => NumericGerm::new(name, 1.0, |x| Ok(Real::one() / (Real::one() - Real::one() / x.clone()))),
            "expinv" => NumericGerm::new(name, 0.0, |x| Ok((Real::one() / x.clone()).exp())),
            "sqrt1p" => NumericGerm::new(name, -1.0, |x| {
                Ok((x + &Real::one()).powr(&crate::scalar::rat(1, 2)))
            }),
            _ => {
                return Err(Error::MalformedInput(format!(
                    "unknown germ `{name}`; builtins are {}",
                    NumericGerm::BUILTINS.join(", ")
                )))
            }
        };
        Ok(g)
    }
}

/// The truncation of `F` to its first `k` terms, as a germ.
pub fn numeric_of_series(f: &Series, k: usize, budget: &Budget) -> Result<NumericGerm> {
    let terms = f.terms_prefix(k, budget)?;
    Ok(germ_of_terms(format!("first {k} terms"), terms))
}

pub fn germ_of_terms(label: impl Into<String>, terms: Vec<Term>) -> NumericGerm {
    let min_x = terms.iter().map(|t| mono_threshold(&t.mono)).fold(f64::NEG_INFINITY, f64::max);
    NumericGerm::new(label, min_x, move |x| terms_eval_real(&terms, x))
}

/// `x ↦ f(log(g(x)))`, valid where `g` is valid and `log g(x)` lies above
/// the threshold of `f`.
pub fn numeric_complog(f: &NumericGerm, g: &NumericGerm) -> NumericGerm {
    let (f2, g2) = (f.clone(), g.clone());
    NumericGerm::new(format!("{} ∘ log ∘ {}", f.label, g.label), g.min_x, move |x| {
        let gx = g2.eval_real(x)?;
        if gx.is_negative() || gx.is_zero() {
            return Err(Error::BelowThreshold {
                x: x.to_f64(),
                threshold: g2.min_x,
            });
        }
        f2.eval_real(&gx.ln())
    })
}

/// Central difference `(f(x+h) − f(x−h)) / 2h`.
pub fn fd_derivative_real(f: &NumericGerm, x: &Real, h: &Real) -> Result<Real> {
    let two_h = h + h;
    Ok((f.eval_real(&(x + h))? - f.eval_real(&(x - h))?) / two_h)
}

pub fn fd_derivative(f: &NumericGerm, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::MalformedInput(format!("step {h} must be positive")));
    }
    Ok(fd_derivative_real(f, &Real::from_f64(x), &Real::from_f64(h))?.to_f64())
}

/// Strictly increasing positive sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalGrid {
    points: Vec<f64>,
}

impl EvalGrid {
    pub fn new(points: Vec<f64>) -> Result<EvalGrid> {
        if points.is_empty() {
            return Err(Error::MalformedInput("empty grid".into()));
        }
        if points.iter().any(|p| !(p.is_finite() && *p > 0.0)) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedInput("grid points must be positive and strictly increasing".into()));
        }
        Ok(EvalGrid { points })
    }

    /// `{10², 10³, 10⁴}` with points at or below `min_x` dropped.
    pub fn default_above(min_x: f64) -> Result<EvalGrid> {
        EvalGrid::new([1e2, 1e3, 1e4].into_iter().filter(|p| *p > min_x).collect())
    }

    /// Parses `a,b,c`.
    pub fn parse(text: &str) -> Result<EvalGrid> {
        let points = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::MalformedInput(format!("grid point `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        EvalGrid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Ratios `|f(x) − F_n(x)| / n(x)` over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub ratios: Vec<f64>,
    pub decreasing: bool,
    pub last: f64,
    pub pass: bool,
}

impl RatioReport {
    /// Default pass threshold on the final ratio.
    pub const FINAL_BELOW: f64 = 0.1;

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "ratios": self.ratios,
            "decreasing": self.decreasing,
            "final": self.last,
            "verdict": if self.pass { "pass" } else { "fail" },
        })
    }
}

/// Samples `f − F_n` against `n`, where `F_n` keeps the terms `≥ n`.
pub fn check_o(f: &NumericGerm, series: &Series, n: &Monomial, grid: &EvalGrid, budget: &Budget) -> Result<RatioReport> {
    let kept = series.terms_down_to(n, budget)?;
    let truncation = germ_of_terms("truncation", kept);
    let mut ratios = Vec::with_capacity(grid.points.len());
    for &p in &grid.points {
        let x = Real::from_f64(p);
        check_above(&x, truncation.min_x.max(mono_threshold(n)))?;
        let diff = (f.eval_real(&x)? - truncation.eval_real(&x)?).abs();
        ratios.push((diff / mono_eval_real(n, &x)?).to_f64());
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().expect("grid is nonempty");
    Ok(RatioReport {
        pass: decreasing && last < RatioReport::FINAL_BELOW,
        decreasing,
        last,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{compose_ps1, PowerSeries1};
    use crate::monomial::Level;
    use crate::scalar::{int, rat};

    fn lv(i: i32) -> Level {
        Level::new(i).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold(0), 0.0);
        assert_eq!(threshold(1), 1.0);
        assert!(close(threshold(2), std::f64::consts::E, 1e-15));
        assert!(close(threshold(3), 15.154262241479262, 1e-14));
    }

    #[test]
    fn monomial_values() {
        assert_eq!(mono_eval(&Monomial::one(), 100.0).unwrap(), 1.0);
        assert!(close(mono_eval(&Monomial::factor(lv(0), int(-1)), 100.0).unwrap(), 0.01, 1e-15));
        let m = Monomial::from_pairs([(lv(-1), int(-1)), (lv(1), int(2))]);
        let want = (-10f64).exp() * 10f64.ln().powi(2);
        assert!(close(mono_eval(&m, 10.0).unwrap(), want, 1e-14));
        assert!(close(want, 2.4070580182e-4, 1e-10));
        assert!(close(want, 2.4068e-4, 2e-4));
        let deep = Monomial::factor(lv(2), int(1));
        assert_eq!(mono_eval(&deep, 2.0).unwrap_err().kind(), "BelowThreshold");
    }

    #[test]
    fn prefixes() {
        let b = Budget::default();
        let geom = compose_ps1(&PowerSeries1::geom(), &Series::monomial(Monomial::factor(lv(0), int(-1))), &b).unwrap();
        assert!(close(series_eval_prefix(&geom, 3, 10.0, &b).unwrap(), 1.11, 1e-15));
        assert_eq!(series_eval_prefix(&Series::zero(), 3, 10.0, &b).unwrap(), 0.0);
        let two = Series::term(int(2), Monomial::exp_power(int(-1)));
        assert!(close(series_eval_prefix(&two, 1, 1.0, &b).unwrap(), 2.0 / std::f64::consts::E, 1e-15));
        let g = numeric_of_series(&Series::from_terms([Term::new(int(1), Monomial::one()), Term::new(int(1), Monomial::factor(lv(0), int(-1)))]), 2, &b).unwrap();
        assert!(close(g.eval(10.0).unwrap(), 1.1, 1e-15));
    }

    #[test]
    fn composed_germs() {
        let sq = NumericGerm::new("x^2", f64::NEG_INFINITY, |x| Ok(x * x));
        let c = numeric_complog(&NumericGerm::builtin("exp").unwrap(), &sq);
        assert!(close(c.eval(10.0).unwrap(), 100.0, 1e-14));
        let l = numeric_complog(&NumericGerm::builtin("loglog").unwrap(), &NumericGerm::builtin("x").unwrap());
        assert_eq!(l.eval(2.0).unwrap_err().kind(), "BelowThreshold");
    }

    #[test]
    fn differences() {
        let sq = NumericGerm::new("x^2", f64::NEG_INFINITY, |x| Ok(x * x));
        assert!((fd_derivative(&sq, 10.0, 1e-4).unwrap() - 20.0).abs() <= 1e-6);
        let one = NumericGerm::builtin("one").unwrap();
        assert!(fd_derivative(&one, 10.0, 1e-4).unwrap().abs() <= 1e-12);
        let e3 = 3f64.exp();
        let d = fd_derivative(&NumericGerm::builtin("log").unwrap(), e3, 1e-3).unwrap();
        assert!((d - (-3f64).exp()).abs() <= 1e-6);
        assert!((d - 0.049787).abs() <= 1e-6);
    }

    #[test]
    fn ratio_reports() {
        let b = Budget::default();
        let x1 = Monomial::factor(lv(0), int(-1));
        let geom = compose_ps1(&PowerSeries1::geom(), &Series::monomial(x1.clone()), &b).unwrap();
        let grid = EvalGrid::new(vec![1e2, 1e3]).unwrap();
        let r = check_o(&NumericGerm::builtin("geom").unwrap(), &geom, &x1.powi(3), &grid, &b).unwrap();
        assert!(close(r.ratios[0], 1.0 / 99.0, 1e-12));
        assert!(close(r.ratios[1], 1.0 / 999.0, 1e-12));
        assert!(r.pass);
        let fin = Series::from_terms([Term::new(int(1), Monomial::factor(lv(0), int(1))), Term::new(rat(1, 2), Monomial::one())]);
        let g = germ_of_terms("fin", fin.terms_prefix(5, &b).unwrap());
        let r = check_o(&g, &fin, &x1.powi(2), &grid, &b).unwrap();
        assert_eq!(r.ratios, vec![0.0, 0.0]);
        let r = check_o(&NumericGerm::builtin("exp").unwrap(), &Series::constant(1), &Monomial::one(), &grid, &b).unwrap();
        assert!(!r.pass && !r.decreasing);
        assert_eq!(r.to_json()["verdict"], "fail");
    }
}
