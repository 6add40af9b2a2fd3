use logfield::calculus::derivative;
use logfield::cli::{self, Io};
use logfield::composition::{compose_with_log, exp_of, log_of};
use logfield::dsl::{self, Env};
use logfield::field::{divide, power};
use logfield::json::{prefix_from_json, prefix_to_json};
use logfield::monomial::{Level, Monomial};
use logfield::numeric::mono_eval;
use logfield::sample;
use logfield::scalar::{int, rat};
use logfield::selftest;
use logfield::series::{Budget, Series};
use logfield::error::Error;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const SEED: u64 = 20_240_917;

fn b() -> Budget {
    Budget::default()
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn agree(a: &Series, c: &Series, k: usize) -> bool {
    a.agrees_with(c, k, &b()).unwrap()
}

/// Monomials over `x`, `log`, `log[2]` with exponents `p/q`, `|p| ≤ 3`, `q ≤ 3`.
fn mono() -> impl Strategy<Value = Monomial> {
    proptest::collection::vec((-3i64..=3, 1i64..=3), 3).prop_map(|e| {
        Monomial::from_pairs(e.into_iter().enumerate().map(|(l, (p, q))| (Level::new(l as i32).unwrap(), rat(p, q))))
    })
}

/// `ln m(x)` at `x = exp(10⁵⁰)`, from `ln log[k](x)` for `k = 0, 1, 2`.
fn log_value(m: &Monomial) -> f64 {
    let logs = [1e50, 1e50f64.ln(), 1e50f64.ln().ln()];
    (0..3)
        .map(|l| m.exponent(Level::new(l).unwrap()).to_f64().unwrap() * logs[l as usize])
        .sum()
}

fn cli_call(args: &[&str]) -> (i32, String, String) {
    let mut input: &[u8] = b"";
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(
        std::iter::once("logfield").chain(args.iter().copied()).map(String::from),
        None,
        Io { stdin: &mut input, stdin_is_terminal: false, out: &mut out, err: &mut err },
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomial_group_and_order(a in mono(), c in mono(), d in mono()) {
        prop_assert_eq!(a.mul(&c).div(&c), a.clone());
        prop_assert_eq!(a.mul(&c), c.mul(&a));
        prop_assert_eq!(a.mul(&a.inv()), Monomial::one());
        prop_assert_eq!(a.cmp(&c), a.mul(&d).cmp(&c.mul(&d)));
        prop_assert_eq!(a > Monomial::one(), a.is_large());
    }

    #[test]
    fn order_matches_limit(a in mono(), c in mono()) {
        let q = a.div(&c);
        prop_assume!(!q.is_one());
        prop_assert_eq!(a > c, log_value(&q) > 0.0, "{} vs {}", a, c);
    }

    #[test]
    fn evaluation_is_multiplicative(a in mono(), c in mono()) {
        let x = 50.0;
        let lhs = mono_eval(&a.mul(&c), x).unwrap();
        let rhs = mono_eval(&a, x).unwrap() * mono_eval(&c, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn ring_laws(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let f = sample::finite_series(r, 6, -1, 2, 4);
        let g = sample::finite_series(r, 6, -1, 2, 4);
        let h = sample::finite_series(r, 6, -1, 2, 4);
        prop_assert!(agree(&f.add(&g).add(&h), &f.add(&g.add(&h)), 12));
        prop_assert!(agree(&f.mul(&g), &g.mul(&f), 12));
        prop_assert!(agree(&f.mul(&g.add(&h)), &f.mul(&g).add(&f.mul(&h)), 12));
        prop_assert!(f.sub(&f).terms_prefix(1, &b()).unwrap().is_empty());
    }

    #[test]
    fn truncation(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let f = sample::finite_series(r, 8, -1, 2, 3);
        let n = sample::monomial(r, -1, 2, 3);
        let all = f.terms_prefix(usize::MAX, &b()).unwrap();
        let kept = f.truncate_above(&n).terms_prefix(usize::MAX, &b()).unwrap();
        let want: Vec<_> = all.iter().filter(|t| t.mono >= n).cloned().collect();
        prop_assert_eq!(&kept, &want);
        let strict = f.truncate_strictly_above(&n).terms_prefix(usize::MAX, &b()).unwrap();
        prop_assert!(strict.iter().all(|t| t.mono > n));
    }

    #[test]
    fn grading_reassembles(seed in any::<u64>()) {
        let e = sample::finite_e_support(&mut rng(seed), 3, 6, 2);
        let grades = e.e_grades().unwrap();
        let parts = Series::sum(grades.iter().map(|g| e.e_part(g)));
        prop_assert!(agree(&parts, &e, 20));
        for g in &grades {
            let back = e.e_coefficient(g).mul_monomial(&Monomial::exp_power(-g.clone()));
            prop_assert!(agree(&back, &e.e_part(g), 20));
        }
    }

    #[test]
    fn field_inverse(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let f = sample::finite_series(r, 5, -1, 2, 3);
        let g = sample::nonzero_series(r, 5, -1, 2, 3);
        prop_assert_eq!(selftest::quotient_check(&f, &g, 10).unwrap(), None);
        let one = divide(&g, &g, &b()).unwrap();
        prop_assert!(agree(&one, &Series::constant(int(1)), 10));
    }

    #[test]
    fn square_root_squares(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let t = sample::small_monomial(r, 0, 2, 2);
        let g = sample::unit_in_one_variable(r, &t);
        let root = power(&g, &rat(1, 2), &b()).unwrap();
        prop_assert!(agree(&root.mul(&root), &g, 10));
    }

    #[test]
    fn derivation_laws(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let f = sample::finite_series(r, 5, -1, 2, 3);
        let g = sample::finite_series(r, 5, -1, 2, 3);
        let (df, dg) = (derivative(&f), derivative(&g));
        prop_assert!(agree(&derivative(&f.add(&g)), &df.add(&dg), 12));
        prop_assert!(agree(&derivative(&f.mul(&g)), &df.mul(&g).add(&f.mul(&dg)), 12));
        prop_assert!(derivative(&Series::constant(int(3))).terms_prefix(1, &b()).unwrap().is_empty());
    }

    #[test]
    fn composition_identities(seed in any::<u64>()) {
        let g = sample::inf_increasing(&mut rng(seed));
        let exp_x = Series::monomial(Monomial::exp_power(int(1)));
        prop_assert!(agree(&compose_with_log(&exp_x, &g, &b()).unwrap(), &g, 12));
        let x = Series::x();
        prop_assert!(agree(&compose_with_log(&x, &g, &b()).unwrap(), &log_of(&g, &b()).unwrap(), 12));
        prop_assert!(agree(&exp_of(&log_of(&g, &b()).unwrap(), &b()).unwrap(), &g, 12));
    }

    #[test]
    fn parser_is_total(text in "\\PC{0,48}") {
        if let Err(e) = dsl::parse_program(&text) {
            prop_assert!(matches!(e, Error::Syntax { .. }), "{}", e);
        }
    }

    #[test]
    fn parser_round_trip(seed in any::<u64>()) {
        let e = sample::expr(&mut rng(seed), 4);
        prop_assert_eq!(dsl::parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let f = sample::finite_series(&mut rng(seed), 8, -1, 3, 6);
        let p = f.observe(8, &b()).unwrap();
        let v = prefix_to_json(&p);
        prop_assert_eq!(prefix_to_json(&prefix_from_json(&v).unwrap()), v);
    }

    #[test]
    fn monomial_text_round_trip(a in mono()) {
        prop_assert_eq!(dsl::parse_monomial(&a.to_string()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cli_is_deterministic(seed in any::<u64>()) {
        let text = sample::expr(&mut rng(seed), 3).to_string();
        for json in [false, true] {
            let mut args = vec!["eval", text.as_str(), "--terms", "6"];
            if json {
                args.push("--json");
            }
            prop_assert_eq!(cli_call(&args), cli_call(&args));
        }
    }
}

#[test]
fn cli_examples() {
    assert_eq!(cli_call(&["eval", "terms(D(log), 1)"]).1, "x^-1\n");
    let (code, out, _) = cli_call(&["eval", "terms(1/(1-x^-1), 4)", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let coeffs: Vec<_> = v["terms"].as_array().unwrap().iter().map(|t| t["coeff"].clone()).collect();
    assert_eq!(coeffs, vec![serde_json::json!("1"); 4]);
    let (code, out, _) = cli_call(&["check-asymptotic", "--germ", "geom", "--series", "geom(x^-1)", "--mono", "x^-3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn cli_rejects_bad_budget() {
    let (code, _, err) = cli_call(&["eval", "x", "--max-terms", "0"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn composition_numeric_far_out() {
    let r = selftest::composition_numeric(50, SEED, &selftest::FAR_POINTS);
    assert!(r.passed(), "{}", r.line());
}

#[test]
fn scalar_exponent_roundtrip() {
    let q: BigRational = rat(-7, 3);
    assert_eq!(dsl::parse_monomial(&Monomial::factor(Level::LOG, q.clone()).to_string()).unwrap().exponent(Level::LOG), q);
    let env = Env::default();
    assert!(agree(&dsl::parse_series("exp^(1/2) * exp^(1/2)", &env).unwrap(), &Series::monomial(Monomial::exp_power(int(1))), 2));
}
