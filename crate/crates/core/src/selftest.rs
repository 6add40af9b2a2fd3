//! Randomized property suites, shared by the `selftest` subcommand and the
//! acceptance tests.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::calculus::derivative;
use crate::composition::{compose_summand, compose_with_log, exp_of, log_of, substitute_logfree, taylor_partial};
use crate::dsl::{self, Env};
use crate::error::{Error, Result};
use crate::field::{compose_ps1, divide, power, PowerSeries1};
use crate::monomial::{Level, Monomial};
use crate::numeric::{fd_derivative_real, mono_eval_real, mono_threshold, terms_eval_real, NumericGerm};
use crate::real::Real;
use crate::sample;
use crate::scalar::{int, rat};
use crate::series::{Budget, Series, Term};

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// `PASS name: n cases, 0 failures, t s` or `FAIL ...` with the first failure.
    pub fn line(&self) -> String {
        self.format(true)
    }

    /// [`line`](Self::line) without the elapsed time.
    pub fn summary(&self) -> String {
        self.format(false)
    }

    fn format(&self, timed: bool) -> String {
        let mut head = format!(
            "{} {}: {} cases, {} failures",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures.len(),
        );
        if timed {
            head += &format!(", {:.2} s", self.elapsed.as_secs_f64());
        }
        match self.failures.first() {
            Some(f) => format!("{head}; first: {f}"),
            None => head,
        }
    }
}

/// Runs `case` for indices `0..cases`. A case fails with `Ok(Some(detail))`,
/// an error or a panic.
fn run(name: &'static str, cases: usize, seed: u64, mut case: impl FnMut(&mut StdRng) -> Result<Option<String>>) -> SuiteResult {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..cases {
        let outcome = catch_unwind(AssertUnwindSafe(|| case(&mut rng)));
        let detail = match outcome {
            Ok(Ok(None)) => continue,
            Ok(Ok(Some(d))) => d,
            Ok(Err(e)) => format!("error: {e}"),
            Err(_) => "panic".to_string(),
        };
        failures.push(format!("case {i}: {detail}"));
    }
    SuiteResult {
        name,
        cases,
        failures,
        elapsed: start.elapsed(),
    }
}

fn b() -> Budget {
    Budget::default()
}

/// `Some(label)` when `a` and `b` differ in their first `k` terms.
fn differ(label: &str, a: &Series, b: &Series, k: usize) -> Result<Option<String>> {
    Ok(a.prefix_mismatch(b, k, &self::b())?.map(|(x, y)| format!("{label}: {x:?} vs {y:?}")))
}

fn first_failure(checks: impl IntoIterator<Item = Result<Option<String>>>) -> Result<Option<String>> {
    for c in checks {
        if let Some(d) = c? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Ring laws and `divide(F, G)·G = F` on finite series with up to 8 terms,
/// levels ≤ 3 and exponent denominators ≤ 6.
pub fn field_laws(cases: usize, seed: u64) -> SuiteResult {
    run("field laws", cases, seed, |rng| {
        let f = sample::finite_series(rng, 8, -1, 3, 6);
        let g = sample::nonzero_series(rng, 8, -1, 3, 6);
        let h = sample::finite_series(rng, 8, -1, 3, 6);
        first_failure([
            quotient_check(&f, &g, 12),
            differ("(F+G)+H", &f.add(&g).add(&h), &f.add(&g.add(&h)), 12),
            differ("F+G", &f.add(&g), &g.add(&f), 12),
            differ("FG", &f.mul(&g), &g.mul(&f), 12),
            differ("(FG)H", &f.mul(&g).mul(&h), &f.mul(&g.mul(&h)), 12),
            differ("F(G+H)", &f.mul(&g.add(&h)), &f.mul(&g).add(&f.mul(&h)), 12),
        ])
    })
}

/// `divide(F, G)·G = F` through the first `k` terms `Q` of the quotient:
/// every other term of `F/G` is below `q_k`, so `Q·G` and `F` must agree
/// strictly above `q_k·lead(G)`.
pub fn quotient_check(f: &Series, g: &Series, k: usize) -> Result<Option<String>> {
    let q = divide(f, g, &b())?.terms_prefix(k, &b())?;
    let qg = Series::from_terms(q.clone()).mul(g).terms_prefix(usize::MAX, &b())?;
    let want = f.terms_prefix(usize::MAX, &b())?;
    let (got, want) = if q.len() < k {
        (qg, want)
    } else {
        let lead = g.leading_term(&b())?.expect("G is nonzero").mono;
        let bound = q[k - 1].mono.mul(&lead);
        let above = |ts: Vec<Term>| ts.into_iter().filter(|t| t.mono > bound).collect::<Vec<_>>();
        (above(qg), above(want))
    };
    Ok((got != want).then(|| format!("divide(F,G)·G: {got:?} vs {want:?}")))
}

/// `(1 − ε)·geom(ε) = 1` for small finite `ε`.
pub fn geometric(cases: usize, seed: u64) -> SuiteResult {
    run("geometric identity", cases, seed, |rng| {
        let eps = sample::small_series(rng, 3, -1, 2, 3);
        let lhs = Series::constant(1).sub(&eps).mul(&compose_ps1(&PowerSeries1::geom(), &eps, &b())?);
        differ("(1-ε)geom(ε)", &lhs, &Series::constant(1), 20)
    })
}

/// Linearity, Leibniz and the E-graded form `(F′)_r = f_r′ − r f_r`.
/// Half of the cases use a lazy `F = P·geom(ε)` and `G` over `log[3]`.
pub fn derivation(cases: usize, seed: u64) -> SuiteResult {
    run("derivation", cases, seed, |rng| {
        let mut f = sample::finite_series(rng, 5, -1, 2, 3);
        let lazy = rng.gen_bool(0.5);
        if lazy {
            let eps = sample::small_series(rng, 2, 0, 2, 2);
            f = f.mul(&compose_ps1(&PowerSeries1::geom(), &eps, &b())?);
        }
        // a level shared with F's infinite block can cancel in F′G + FG′
        // over infinitely many terms, e.g. (x⁻¹·x)′ = 0
        let g = if lazy { sample::finite_series(rng, 5, 3, 3, 3) } else { sample::finite_series(rng, 5, -1, 2, 3) };
        let (df, dg) = (derivative(&f), derivative(&g));
        let e = sample::finite_e_support(rng, 3, 6, 2);
        let de = derivative(&e);
        let mut checks = vec![
            differ("(F+G)'", &derivative(&f.add(&g)), &df.add(&dg), 12),
            differ("(FG)'", &derivative(&f.mul(&g)), &df.mul(&g).add(&f.mul(&dg)), 12),
        ];
        for r in e.e_grades().unwrap_or_default() {
            let fr = e.e_coefficient(&r);
            let want = derivative(&fr).sub(&fr.scalar_mul_rational(&r));
            checks.push(differ("(F')_r", &de.e_coefficient(&r), &want, 12));
        }
        first_failure(checks)
    })
}

/// `e^{e^2}`.
pub fn ee2() -> Real {
    Real::from_f64(std::f64::consts::E).powr(&int(2)).exp()
}

/// Central differences of monomials (levels ≤ 2) at `x = e^{e^2}`,
/// `h = x·10⁻⁶`, against the formal derivative; relative error ≤ `10⁻⁵`.
pub fn monomial_derivative_numeric(cases: usize, seed: u64) -> SuiteResult {
    let x = ee2();
    let h = &x * &Real::from_f64(1e-6);
    run("monomial derivative vs finite differences", cases, seed, move |rng| {
        let m = sample::monomial(rng, -1, 2, 3);
        let m2 = m.clone();
        let germ = NumericGerm::new(m.to_string(), mono_threshold(&m), move |x| mono_eval_real(&m2, x));
        let fd = fd_derivative_real(&germ, &x, &h)?;
        let exact = terms_eval_real(&derivative(&Series::monomial(m.clone())).terms_prefix(8, &b())?, &x)?;
        if exact.is_zero() {
            let scale = mono_eval_real(&m, &x)?;
            let ok = (fd / scale).abs().to_f64() < 1e-9;
            return Ok((!ok).then(|| format!("{m}: nonzero difference quotient of a constant")));
        }
        let rel = ((fd - exact.clone()) / exact).abs().to_f64();
        Ok((rel > 1e-5).then(|| format!("{m}: relative error {rel:e}")))
    })
}

/// `compose_with_log(F, G) = substitute_logfree(shift_log(F), G)` for `F`
/// with at most 4 grades.
pub fn composition_associativity(cases: usize, seed: u64) -> SuiteResult {
    run("composition associativity", cases, seed, |rng| {
        let f = sample::finite_e_support(rng, 4, 5, 2);
        let g = sample::inf_increasing(rng);
        let lhs = compose_with_log(&f, &g, &b())?;
        let rhs = substitute_logfree(&f.shift_log(), &g, &b())?;
        differ(&format!("F = {f:?}, G = {g:?}"), &lhs, &rhs, 10)
    })
}

/// `compose_with_log(exp^-r, G) = power(G, -r)` for `r ∈ {±1, ±1/2, 2}`.
pub fn power_coherence(cases: usize, seed: u64) -> SuiteResult {
    run("power coherence", cases, seed, |rng| {
        let g = sample::inf_increasing(rng);
        let mut checks = Vec::new();
        for r in [int(1), int(-1), rat(1, 2), rat(-1, 2), int(2)] {
            let lhs = compose_with_log(&Series::monomial(Monomial::exp_power(-r.clone())), &g, &b())?;
            let rhs = power(&g, &-r.clone(), &b())?;
            checks.push(differ(&format!("r = {r}, G = {g:?}"), &lhs, &rhs, 12));
        }
        first_failure(checks)
    })
}

/// `exp_of(log_of(G)) = G` and `log_of(exp_of(F)) = F`.
pub fn round_trips(cases: usize, seed: u64) -> SuiteResult {
    run("exp/log round trips", cases, seed, |rng| {
        let g = sample::inf_increasing(rng);
        let f = sample::log_linear_plus_small(rng);
        first_failure([
            differ(&format!("exp(log(G)), G = {g:?}"), &exp_of(&log_of(&g, &b())?, &b())?, &g, 15),
            differ(&format!("log(exp(F)), F = {f:?}"), &log_of(&exp_of(&f, &b())?, &b())?, &f, 15),
        ])
    })
}

/// Terms compared above the Taylor truncation floor; the part above it may
/// be infinite.
const TAYLOR_TERMS: usize = 15;

/// Stage-`N` truncations of the Taylor sum against `compose_with_log`
/// above `lead(H)^{N+1}·lead(F∘G)`, `N ≤ 4`, on the first
/// [`TAYLOR_TERMS`] terms there.
pub fn taylor(cases: usize, seed: u64) -> SuiteResult {
    run("taylor truncation", cases, seed, |rng| {
        let f = sample::finite_series(rng, 3, -1, 1, 2);
        let c = [int(1), int(4), rat(1, 4), rat(9, 4)][rng.gen_range(0..4)].clone();
        let mut g = Series::term(c, Monomial::factor(Level::LOG, int(1)));
        if rng.gen_bool(0.5) {
            g = g.add(&Series::term(sample::nonzero_rational(rng, 2, 2), Monomial::factor(Level::log(2), int(1))));
        }
        let t = sample::small_monomial(rng, 0, 1, 2);
        let h = sample::unit_in_one_variable(rng, &t).sub(&Series::constant(1));
        let fg = compose_with_log(&f, &exp_of(&g, &b())?, &b())?;
        let Some(lead_fg) = fg.leading_term(&b())? else {
            return Ok(None);
        };
        let lead_h = h.leading_term(&b())?.expect("H is nonzero").mono;
        let direct = compose_with_log(&f, &exp_of(&g.add(&h), &b())?, &b())?;
        for n in 0..=4 {
            let floor = lead_h.powi(n as i64 + 1).mul(&lead_fg.mono);
            let above = |s: &Series| s.terms_above(&floor, TAYLOR_TERMS, &b());
            let part = above(&taylor_partial(&f, &g, &h, n, &b())?)?;
            let want = above(&direct)?;
            if part != want {
                return Ok(Some(format!("N = {n}, F = {f:?}, G = {g:?}, H = {h:?}: {part:?} vs {want:?}")));
            }
        }
        Ok(None)
    })
}

/// For `exp_order(G) = s₀ < 0`, the grade-`r` summand of `F ∘ log ∘ G` has
/// `exp_order = −r·s₀`.
pub fn order_law(cases: usize, seed: u64) -> SuiteResult {
    run("order law", cases, seed, |rng| {
        let k = [rat(1, 4), int(1), int(4), rat(9, 4)][rng.gen_range(0..4)].clone();
        let g = sample::inf_increasing(rng).mul_monomial(&Monomial::exp_power(k.clone()));
        let s0 = g.exp_order(&b())?;
        assert_eq!(s0, -k);
        let f = sample::finite_e_support(rng, 3, 4, 1);
        for r in f.e_grades().unwrap_or_default() {
            if f.e_coefficient(&r).is_known_zero() {
                continue;
            }
            let got = compose_summand(&f, &g, &r, &b())?.exp_order(&b())?;
            if got != -r.clone() * s0.clone() {
                return Ok(Some(format!("r = {r}, s0 = {s0}: exp_order {got}")));
            }
        }
        Ok(None)
    })
}

/// Sum of the terms at real `x`.
fn eval_at(terms: &[Term], x: &Real) -> Result<Real> {
    terms_eval_real(terms, x)
}

/// The desk-scale evaluation points of [`composition_numeric`].
pub const DESK_POINTS: [f64; 3] = [1e2, 1e3, 1e4];

/// Points far enough out that the scales `x`, `log`, `log[2]` separate.
pub const FAR_POINTS: [f64; 3] = [1e16, 1e40, 1e100];

/// `|F(log G(x)) − S_k(x)| ≤ 2·|t_{k+1}(x)|` at `points` with
/// `S = compose_with_log(F, G)` and `k = 8`.
pub fn composition_numeric(cases: usize, seed: u64, points: &[f64]) -> SuiteResult {
    const K: usize = 8;
    run("composition vs numbers", cases, seed, |rng| {
        let f = sample::finite_series(rng, 4, -1, 1, 2);
        let g = sample::plain_inf_increasing(rng);
        let (f_terms, g_terms) = (f.terms_prefix(64, &b())?, g.terms_prefix(64, &b())?);
        let s = compose_with_log(&f, &g, &b())?.terms_prefix(K + 1, &b())?;
        let (prefix, next) = (&s[..s.len().min(K)], s.get(K));
        for &p in points {
            let x = Real::from_f64(p);
            let y = eval_at(&g_terms, &x)?.ln();
            let exact = eval_at(&f_terms, &y)?;
            let approx = eval_at(prefix, &x)?;
            let bound = match next {
                Some(t) => eval_at(std::slice::from_ref(t), &x)?.abs() * Real::from_f64(2.0),
                None => Real::zero(),
            };
            let slack = exact.abs() * Real::from_f64(1e-20);
            let err = (exact - approx).abs();
            if err > bound.clone() + slack {
                return Ok(Some(format!(
                    "F = {f:?}, G = {g:?}, x = {p}: error {:e} > bound {:e}",
                    err.to_f64(),
                    bound.to_f64()
                )));
            }
        }
        Ok(None)
    })
}

/// Per-input time limit of the fuzz suite.
pub const FUZZ_LIMIT: Duration = Duration::from_secs(1);

/// Parses random byte strings and token soups: no panics, nothing slower
/// than [`FUZZ_LIMIT`].
pub fn parser_fuzz(inputs: usize, seed: u64) -> SuiteResult {
    run("parser fuzz", inputs, seed, |rng| {
        let len = rng.gen_range(0..=64);
        let text = if rng.gen_bool(0.5) {
            let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            sample::token_soup(rng, len)
        };
        let start = Instant::now();
        let parsed = dsl::parse_program(&text);
        let took = start.elapsed();
        if took > FUZZ_LIMIT {
            return Ok(Some(format!("{text:?} took {took:?}")));
        }
        if let Err(e) = parsed {
            if !matches!(e, Error::Syntax { .. }) {
                return Ok(Some(format!("{text:?}: non-syntax error {e}")));
            }
        }
        Ok(None)
    })
}

/// `parse(print(e)) = e` and `format(parse(format(v))) = format(v)` for
/// generated expressions.
pub fn parser_round_trip(cases: usize, seed: u64) -> SuiteResult {
    let mut env = Env::default();
    env.display_terms = 100_000;
    run("parser round trip", cases, seed, move |rng| {
        let e = sample::expr(rng, 4);
        let text = e.to_string();
        let back = dsl::parse_expr(&text)?;
        if back != e {
            return Ok(Some(format!("{text}: reparsed as {back}")));
        }
        let once = dsl::format_value(&env.elaborate(&e)?, &env)?;
        let twice = dsl::format_value(&dsl::eval_str(&once, &env)?, &env)?;
        Ok((once != twice).then(|| format!("{text}: {once} then {twice}")))
    })
}

type Suite = Box<dyn FnOnce() -> SuiteResult + Send>;

fn suites(seed: u64, scale: f64) -> Vec<Suite> {
    let n = move |full: usize| ((full as f64 * scale).ceil() as usize).max(1);
    vec![
        Box::new(move || field_laws(n(1000), seed)),
        Box::new(move || geometric(n(200), seed)),
        Box::new(move || derivation(n(500), seed)),
        Box::new(move || monomial_derivative_numeric(n(100), seed)),
        Box::new(move || composition_associativity(n(100), seed)),
        Box::new(move || power_coherence(n(50), seed)),
        Box::new(move || round_trips(n(100), seed)),
        Box::new(move || taylor(n(50), seed)),
        Box::new(move || composition_numeric(n(50), seed, &FAR_POINTS)),
        Box::new(move || order_law(n(50), seed)),
        Box::new(move || parser_fuzz(n(100_000), seed)),
        Box::new(move || parser_round_trip(n(1000), seed)),
    ]
}

/// Every suite at `scale` times its full case count, in order.
pub fn quick(seed: u64, scale: f64) -> Vec<SuiteResult> {
    suites(seed, scale).into_iter().map(|s| s()).collect()
}

/// [`quick`] with one thread per suite. Results keep the suite order.
pub fn quick_parallel(seed: u64, scale: f64) -> Vec<SuiteResult> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = suites(seed, scale).into_iter().map(|s| scope.spawn(s)).collect();
        handles.into_iter().map(|h| h.join().expect("suites catch their panics")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for r in quick(7, 0.01) {
            assert!(r.passed(), "{}", r.line());
        }
    }

    #[test]
    fn failures_are_reported() {
        let r = run("demo", 3, 1, |_| Err(Error::ZeroSeries));
        assert_eq!(r.failures.len(), 3);
        assert!(r.line().starts_with("FAIL demo: 3 cases, 3 failures"));
    }
}
