//! Random inputs for property suites and examples.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dsl::{BinOp, Expr};
use crate::monomial::{Level, Monomial};
use crate::scalar::{int, rat, Rational};
use crate::series::{Series, Term};

/// `p/q` with `0 < |p| ≤ num`, `1 ≤ q ≤ den`.
pub fn nonzero_rational(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    let p = rng.gen_range(1..=num) * if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(p, rng.gen_range(1..=den))
}

/// A monomial over levels `lo..=hi` with exponents `p/q`, `|p| ≤ 3`,
/// `q ≤ den`.
pub fn monomial(rng: &mut impl Rng, lo: i32, hi: i32, den: i64) -> Monomial {
    let mut pairs: Vec<(Level, Rational)> = Vec::new();
    for l in lo..=hi {
        if rng.gen_bool(0.5) {
            pairs.push((Level::new(l).expect("level ≥ -1"), nonzero_rational(rng, 3, den)));
        }
    }
    Monomial::from_pairs(pairs)
}

/// A monomial `< 1` over levels `lo..=hi`.
pub fn small_monomial(rng: &mut impl Rng, lo: i32, hi: i32, den: i64) -> Monomial {
    loop {
        let m = monomial(rng, lo, hi, den);
        if m.is_small() {
            return m;
        }
        if m.is_large() {
            return m.inv();
        }
    }
}

/// Up to `max_terms` terms with small rational coefficients.
pub fn finite_series(rng: &mut impl Rng, max_terms: usize, lo: i32, hi: i32, den: i64) -> Series {
    let n = rng.gen_range(1..=max_terms);
    Series::from_terms((0..n).map(|_| Term::new(nonzero_rational(rng, 5, 4), monomial(rng, lo, hi, den))))
}

/// A nonzero finite series.
pub fn nonzero_series(rng: &mut impl Rng, max_terms: usize, lo: i32, hi: i32, den: i64) -> Series {
    loop {
        let s = finite_series(rng, max_terms, lo, hi, den);
        if !s.is_known_zero() {
            return s;
        }
    }
}

/// A finite series with every monomial `< 1`.
pub fn small_series(rng: &mut impl Rng, max_terms: usize, lo: i32, hi: i32, den: i64) -> Series {
    let n = rng.gen_range(1..=max_terms);
    Series::from_terms((0..n).map(|_| Term::new(nonzero_rational(rng, 5, 4), small_monomial(rng, lo, hi, den))))
}

/// `1 + P(t)` for one small monomial `t` and `P` of degree ≤ 2 without
/// constant term.
pub fn unit_in_one_variable(rng: &mut impl Rng, t: &Monomial) -> Series {
    let mut terms = vec![Term::new(int(1), Monomial::one())];
    for k in 1..=rng.gen_range(1..=2) {
        if k == 1 || rng.gen_bool(0.5) {
            terms.push(Term::new(nonzero_rational(rng, 3, 3), t.powi(k)));
        }
    }
    Series::from_terms(terms)
}

/// Leading coefficients with rational square roots.
const SQUARES: [(i64, i64); 4] = [(1, 1), (4, 1), (1, 4), (9, 4)];

/// `G = a · g · (1 + P(t))`: `a` a positive square, `g > 1` log-free over
/// levels `0..=2` whose leading exponent is a square too (so every rational
/// power of `log G` has a rational leading coefficient), `t` small.
pub fn inf_increasing(rng: &mut impl Rng) -> Series {
    let (p, q) = *SQUARES.choose(rng).expect("nonempty");
    let lead = rng.gen_range(0..=2);
    let (dp, dq) = *SQUARES.choose(rng).expect("nonempty");
    let mut pairs = vec![(Level::new(lead).expect("level"), rat(dp, dq))];
    for l in lead + 1..=2 {
        if rng.gen_bool(0.5) {
            pairs.push((Level::new(l).expect("level"), nonzero_rational(rng, 3, 2)));
        }
    }
    let t = small_monomial(rng, 0, 2, 2);
    unit_in_one_variable(rng, &t).mul_term(&Term::new(rat(p, q), Monomial::from_pairs(pairs)))
}

/// `x + c` with `c ∈ {-1, -1/2, 0, 1/2, 1}`. Its logarithm has no constant
/// term, so compositions converge quickly already at `x = 100`.
pub fn plain_inf_increasing(rng: &mut impl Rng) -> Series {
    let c = rat(rng.gen_range(-2..=2), 2);
    Series::from_terms([Term::new(int(1), Monomial::factor(Level::X, int(1))), Term::new(c, Monomial::one())])
}

/// A finite series whose monomials carry at most `grades` distinct `exp`
/// exponents, each `≤ 0`; the remaining factors are over levels `0..=hi`.
pub fn finite_e_support(rng: &mut impl Rng, grades: usize, max_terms: usize, hi: i32) -> Series {
    let pool: Vec<Rational> = (0..grades).map(|_| rat(-rng.gen_range(0..=6), rng.gen_range(1..=2))).collect();
    let n = rng.gen_range(1..=max_terms);
    Series::from_terms((0..n).map(|_| {
        let e = pool.choose(rng).expect("nonempty").clone();
        let m = monomial(rng, 0, hi, 2).mul(&Monomial::exp_power(e));
        Term::new(nonzero_rational(rng, 5, 4), m)
    }))
}

/// `c·log_k`-combination plus constant plus a small finite part: a valid
/// argument for `exp_of`.
pub fn log_linear_plus_small(rng: &mut impl Rng) -> Series {
    let mut terms = Vec::new();
    for level in 0..=2 {
        if rng.gen_bool(0.5) {
            terms.push(Term::new(nonzero_rational(rng, 3, 2), Monomial::factor(Level::new(level).expect("level"), int(1))));
        }
    }
    if rng.gen_bool(0.5) {
        terms.push(Term::new(nonzero_rational(rng, 3, 2), Monomial::one()));
    }
    let t = small_monomial(rng, 0, 2, 2);
    let tail = unit_in_one_variable(rng, &t).sub(&Series::constant(1));
    Series::from_terms(terms).add(&tail)
}

/// Random expression trees over finite values: literals, `x`, `exp`,
/// `log[k]`, `+ - * /` with rational or monomial divisors, and powers of
/// monomials.
pub fn expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng);
    }
    match rng.gen_range(0..6) {
        0 => Expr::Neg(Box::new(expr(rng, depth - 1))),
        1 => {
            let m = mono_expr(rng);
            Expr::Bin(BinOp::Div, Box::new(expr(rng, depth - 1)), Box::new(m))
        }
        2 => Expr::Bin(BinOp::Div, Box::new(expr(rng, depth - 1)), Box::new(Expr::Num(rng.gen_range(1..=9).into()))),
        3 => Expr::Bin(BinOp::Add, Box::new(expr(rng, depth - 1)), Box::new(expr(rng, depth - 1))),
        4 => Expr::Bin(BinOp::Sub, Box::new(expr(rng, depth - 1)), Box::new(expr(rng, depth - 1))),
        _ => Expr::Bin(BinOp::Mul, Box::new(expr(rng, depth - 1)), Box::new(expr(rng, depth - 1))),
    }
}

fn leaf(rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..3) {
        0 => Expr::Num(rng.gen_range(0..=12).into()),
        _ => mono_expr(rng),
    }
}

fn mono_expr(rng: &mut impl Rng) -> Expr {
    let base = match rng.gen_range(0..4) {
        0 => Expr::X,
        1 => Expr::Exp,
        2 => Expr::Log(1),
        _ => Expr::Log(rng.gen_range(2..=4)),
    };
    if rng.gen_bool(0.6) {
        Expr::Pow(Box::new(base), nonzero_rational(rng, 4, 3))
    } else {
        base
    }
}

/// Printable ASCII mixed with grammar fragments, for parser fuzzing.
pub fn token_soup(rng: &mut impl Rng, len: usize) -> String {
    const PIECES: [&str; 28] = [
        "x", "exp", "log", "log[", "]", "(", ")", "[", "^", "^-", "/", "*", "+", "-", ",", ";", "\n", "let ", "=",
        "1", "23", "0", "terms(", "complog(", "D(", "#", " ", "·",
    ];
    (0..len).map(|_| *PIECES.choose(rng).expect("nonempty")).collect()
}
