use super::*;
use crate::field::{compose_ps1, PowerSeries1};
use crate::scalar::rat;

fn b() -> Budget {
    Budget::default()
}

fn xp(n: i64) -> Monomial {
    Monomial::factor(Level::X, int(n))
}

fn ex(n: i64) -> Monomial {
    Monomial::exp_power(int(n))
}

fn t(c: i64, m: Monomial) -> Term {
    Term::new(c, m)
}

fn geom() -> Series {
    compose_ps1(&PowerSeries1::geom(), &Series::monomial(xp(-1)), &b()).unwrap()
}

#[test]
fn canonical_finite_series() {
    assert!(Series::from_terms([]).terms_prefix(3, &b()).unwrap().is_empty());
    let s = Series::from_terms([t(1, xp(-1)), t(2, Monomial::one()), t(-1, xp(-1))]);
    assert_eq!(s.terms_prefix(5, &b()).unwrap(), vec![t(2, Monomial::one())]);
    let s = Series::from_terms([t(1, xp(-2)), t(1, xp(3)), t(4, ex(-1))]);
    assert_eq!(
        s.terms_prefix(5, &b()).unwrap(),
        vec![t(1, xp(3)), t(1, xp(-2)), t(4, ex(-1))]
    );
}

#[test]
fn prefixes_are_memoized() {
    let g = geom();
    let p = g.terms_prefix(3, &b()).unwrap();
    assert_eq!(p, vec![t(1, Monomial::one()), t(1, xp(-1)), t(1, xp(-2))]);
    assert_eq!(g.terms_prefix(3, &b()).unwrap(), p);
    let f = Series::from_terms([t(3, xp(2)), t(1, ex(-1))]);
    assert!(f.sub(&f).terms_prefix(1, &b()).unwrap().is_empty());
}

#[test]
fn leading_terms() {
    let f = Series::from_terms([t(3, xp(-1)), t(1, ex(-1))]);
    assert_eq!(f.leading_term(&b()).unwrap(), Some(t(3, xp(-1))));
    assert_eq!(Series::zero().leading_term(&b()).unwrap(), None);
    let one_minus = Series::from_terms([t(1, Monomial::one()), t(-1, xp(-1))]);
    assert_eq!(geom().mul(&one_minus).leading_term(&b()).unwrap(), Some(t(1, Monomial::one())));
}

#[test]
fn ring_examples() {
    let a = Series::from_terms([t(1, Monomial::one()), t(1, xp(-1))]);
    let c = Series::from_terms([t(-1, Monomial::one()), t(1, xp(-2))]);
    assert_eq!(a.add(&c).terms_prefix(5, &b()).unwrap(), vec![t(1, xp(-1)), t(1, xp(-2))]);
    assert!(a.scalar_mul(&Scalar::zero()).terms_prefix(2, &b()).unwrap().is_empty());
    let one_minus = Series::from_terms([t(1, Monomial::one()), t(-1, xp(-1))]);
    let prod = one_minus.mul(&geom());
    assert_eq!(prod.terms_prefix(1, &b()).unwrap(), vec![t(1, Monomial::one())]);
    // the remaining terms cancel forever, which no finite budget can prove
    let quick = Budget::new(10_000, 2_000).unwrap();
    assert!(prod.observe(2, &quick).unwrap().budget_hit.is_some());
    // but everything above a floor is reachable
    assert_eq!(prod.terms_down_to(&xp(-40), &b()).unwrap(), vec![t(1, Monomial::one())]);
    assert_eq!(
        prod.truncate_above(&xp(-8)).terms_prefix(3, &b()).unwrap(),
        vec![t(1, Monomial::one())]
    );
    assert!(prod.agrees_with(&Series::constant(1), 10, &b()).unwrap());
    assert!(!prod.agrees_with(&Series::from_terms([t(1, Monomial::one()), t(1, xp(-3))]), 10, &b()).unwrap());
    // dividing by it needs the lead of `prod - 1`, which is a zero test
    assert!(crate::field::divide(&one_minus, &prod, &quick).unwrap_err().is_budget());
    let q = crate::field::divide(&one_minus, &geom(), &b()).unwrap();
    assert_eq!(
        q.terms_down_to(&xp(-6), &b()).unwrap(),
        vec![t(1, Monomial::one()), t(-2, xp(-1)), t(1, xp(-2))]
    );
    let p = Series::from_terms([t(1, xp(1)), t(1, Monomial::one())]);
    let q = Series::from_terms([t(1, xp(1)), t(-1, Monomial::one())]);
    assert_eq!(
        p.mul(&q).terms_prefix(5, &b()).unwrap(),
        vec![t(1, xp(2)), t(-1, Monomial::one())]
    );
    assert_eq!(
        p.mul(&Series::constant(1)).terms_prefix(5, &b()).unwrap(),
        p.terms_prefix(5, &b()).unwrap()
    );
}

#[test]
fn monomial_shifts() {
    let a = Series::from_terms([t(1, Monomial::one()), t(1, xp(-1))]);
    assert_eq!(
        a.mul_monomial(&ex(-1)).terms_prefix(3, &b()).unwrap(),
        vec![t(1, ex(-1)), t(1, ex(-1).mul(&xp(-1)))]
    );
    let shifted = geom().mul_monomial(&xp(-1)).terms_prefix(3, &b()).unwrap();
    assert_eq!(shifted, vec![t(1, xp(-1)), t(1, xp(-2)), t(1, xp(-3))]);
}

#[test]
fn truncation() {
    let f = Series::from_terms([t(1, Monomial::one()), t(1, xp(-1)), t(1, ex(-1))]);
    let tr = f.truncate_above(&xp(-5));
    assert_eq!(tr.terms_prefix(5, &b()).unwrap(), vec![t(1, Monomial::one()), t(1, xp(-1))]);
    assert_eq!(
        tr.truncate_above(&xp(-5)).terms_prefix(5, &b()).unwrap(),
        tr.terms_prefix(5, &b()).unwrap()
    );
    assert!(f.truncate_above(&xp(1)).terms_prefix(5, &b()).unwrap().is_empty());
    let g = geom().truncate_above(&xp(-3));
    assert_eq!(g.terms_prefix(10, &b()).unwrap().len(), 4);
}

#[test]
fn exp_orders() {
    let f = Series::from_terms([t(1, ex(-2)), t(1, ex(-2).mul(&xp(-1)))]);
    assert_eq!(f.exp_order(&b()).unwrap(), int(2));
    assert_eq!(Series::monomial(xp(-3)).exp_order(&b()).unwrap(), int(0));
    let m = Monomial::from_pairs([(Level::EXP, int(3)), (Level::LOG, int(-1))]);
    assert_eq!(Series::monomial(m).exp_order(&b()).unwrap(), int(-3));
    assert_eq!(Series::zero().exp_order(&b()).unwrap_err(), Error::ZeroSeries);
}

#[test]
fn e_coefficients() {
    let log_inv = Monomial::factor(Level::LOG, int(-1));
    let f = Series::from_terms([t(1, ex(-1).mul(&log_inv)), t(1, xp(-2))]);
    assert_eq!(f.e_coefficient(&int(1)).terms_prefix(3, &b()).unwrap(), vec![t(1, log_inv)]);
    assert!(f.e_coefficient(&int(5)).terms_prefix(3, &b()).unwrap().is_empty());
    let g = geom().mul_monomial(&ex(-1));
    assert_eq!(
        g.e_coefficient(&int(1)).terms_prefix(3, &b()).unwrap(),
        vec![t(1, Monomial::one()), t(1, xp(-1)), t(1, xp(-2))]
    );
}

#[test]
fn grading_reaches_past_infinite_blocks() {
    // the grade-0 block of (Σ x^-n)(1 + exp^-1) is infinite
    let f = geom().mul(&Series::from_terms([t(1, Monomial::one()), t(1, ex(-1))]));
    assert_eq!(
        f.e_coefficient(&int(1)).terms_prefix(2, &b()).unwrap(),
        vec![t(1, Monomial::one()), t(1, xp(-1))]
    );
}

#[test]
fn small_and_increasing() {
    let s = Series::from_terms([t(1, xp(-1)), t(1, xp(-2))]);
    assert!(s.is_small(&b()).unwrap());
    assert!(Series::zero().is_small(&b()).unwrap());
    let f = Series::from_terms([t(-3, xp(1)), t(1, Monomial::one())]);
    assert!(!f.is_inf_increasing(&b()).unwrap());
    let g = Series::from_terms([t(2, Monomial::factor(Level::log(2), int(1))), t(5, Monomial::one())]);
    assert!(g.is_inf_increasing(&b()).unwrap());
}

#[test]
fn almost_regular_rows() {
    let s = almost_regular(&[(int(0), vec![int(1)])], true).unwrap();
    assert_eq!(s.terms_prefix(3, &b()).unwrap(), vec![t(1, Monomial::one())]);
    let s = almost_regular(&[(int(0), vec![int(2)]), (int(1), vec![int(0), int(3)])], true).unwrap();
    assert_eq!(
        s.terms_prefix(3, &b()).unwrap(),
        vec![t(2, Monomial::one()), t(3, ex(-1).mul(&xp(1)))]
    );
    let err = almost_regular(&[(int(1), vec![int(1)]), (rat(1, 2), vec![int(1)])], false).unwrap_err();
    assert_eq!(err.kind(), "MalformedInput");
    assert!(almost_regular(&[(int(0), vec![int(0), int(1)])], true).is_err());
}

#[test]
fn budget_errors_are_resumable() {
    let g = geom().mul(&geom());
    let small = Budget::new(10_000, 20).unwrap();
    let err = g.terms_prefix(50, &small).unwrap_err();
    assert!(err.is_budget());
    let p = g.terms_prefix(6, &b()).unwrap();
    assert_eq!(p, (0..6).map(|n| t(n + 1, xp(-n))).collect::<Vec<_>>());
    let tight = Budget::new(3, 1_000_000).unwrap();
    assert!(geom().terms_prefix(10, &tight).unwrap_err().to_string().contains("--max-terms"));
}

#[test]
fn observation_reports_state() {
    let p = geom().observe(3, &b()).unwrap();
    assert!(!p.exhausted && p.budget_hit.is_none());
    let p = Series::from_terms([t(1, xp(1))]).observe(3, &b()).unwrap();
    assert!(p.exhausted);
    let p = geom().observe(100, &Budget::new(10_000, 30).unwrap()).unwrap();
    assert!(p.budget_hit.is_some());
}

#[test]
fn budget_parsing() {
    assert_eq!(Budget::parse("terms=5,steps=7").unwrap(), Budget::new(5, 7).unwrap());
    assert_eq!(Budget::parse("5,7").unwrap(), Budget::new(5, 7).unwrap());
    assert_eq!(Budget::parse("steps=9").unwrap().max_steps, 9);
    assert!(Budget::parse("terms=0").is_err());
    assert!(Budget::parse("nonsense").is_err());
}

#[test]
fn certificates_hold() {
    let one_minus = Series::from_terms([t(1, Monomial::one()), t(-1, xp(-1)), t(1, ex(-1))]);
    let q = crate::field::divide(&Series::x(), &one_minus, &b()).unwrap();
    q.verify_prefix(15, &b()).unwrap();
}

#[test]
fn text_form() {
    let s = Series::from_terms([t(1, Monomial::one()), t(-2, xp(-1)), Term::new(rat(1, 2), ex(-1))]);
    assert_eq!(format_terms(&s.terms_prefix(5, &b()).unwrap(), true), "1 - 2*x^-1 + 1/2*exp^-1");
    assert_eq!(format_terms(&geom().terms_prefix(2, &b()).unwrap(), false), "1 + x^-1 + ...");
    assert_eq!(format_terms(&[], true), "0");
}
