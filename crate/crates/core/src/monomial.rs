//! The ordered group of monomials `exp^r₋₁ · x^r₀ · log^r₁ · log[2]^r₂ ···`.
//!
//! A monomial is a finite map from levels to nonzero exact rational
//! exponents. Level `-1` is `exp`, level `0` is `x`, level `k ≥ 1` is the
//! `k`-th iterate of `log`. Monomials are ordered by eventual growth, which is
//! the lexicographic order on exponents read from level `-1` upwards.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(i32);

impl Level {
    pub const EXP: Level = Level(-1);
    pub const X: Level = Level(0);
    pub const LOG: Level = Level(1);

    pub fn new(value: i32) -> Result<Level> {
        if value < -1 {
            return Err(Error::MalformedInput(format!("level {value} is below -1")));
        }
        Ok(Level(value))
    }

    /// The `k`-th iterated logarithm (`k = 0` is `x`).
    pub fn log(k: u32) -> Level {
        Level(k as i32)
    }

    pub fn get(self) -> i32 {
        self.0
    }

    /// Level of `log_k ∘ log`.
    pub fn up(self) -> Level {
        Level(self.0 + 1)
    }

    /// Level of `log_k ∘ exp`, if it is still a level.
    pub fn down(self) -> Option<Level> {
        (self.0 > -1).then(|| Level(self.0 - 1))
    }

    pub fn name(self) -> String {
        match self.0 {
            -1 => "exp".into(),
            0 => "x".into(),
            1 => "log".into(),
            k => format!("log[{k}]"),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An element of the monomial group. Stores only nonzero exponents, sorted by
/// level, so structural equality is group equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(Level, Rational)>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    /// `level^exponent`.
    pub fn factor(level: Level, exponent: Rational) -> Monomial {
        Monomial::from_pairs([(level, exponent)])
    }

    /// `x`.
    pub fn x() -> Monomial {
        Monomial::factor(Level::X, Rational::one())
    }

    pub fn exp_power(r: Rational) -> Monomial {
        Monomial::factor(Level::EXP, r)
    }

    /// Builds a monomial from arbitrary pairs, summing repeated levels.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Level, Rational)>) -> Monomial {
        let mut exps: Vec<(Level, Rational)> = pairs.into_iter().collect();
        exps.sort_by_key(|(l, _)| *l);
        let mut out: Vec<(Level, Rational)> = Vec::with_capacity(exps.len());
        for (l, e) in exps {
            match out.last_mut() {
                Some((last, acc)) if *last == l => *acc += e,
                _ => out.push((l, e)),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Monomial { exps: out }
    }

    pub fn exps(&self) -> &[(Level, Rational)] {
        &self.exps
    }

    pub fn exponent(&self, level: Level) -> Rational {
        self.exps
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Exponent at level `-1`.
    pub fn exp_exponent(&self) -> Rational {
        self.exponent(Level::EXP)
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        self.exps.iter().map(|(l, _)| *l)
    }

    pub fn min_level(&self) -> Option<Level> {
        self.exps.first().map(|(l, _)| *l)
    }

    pub fn max_level(&self) -> Option<Level> {
        self.exps.last().map(|(l, _)| *l)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() || j < other.exps.len() {
            match (self.exps.get(i), other.exps.get(j)) {
                (Some((la, ea)), Some((lb, eb))) if la == lb => {
                    let s = ea + eb;
                    if !s.is_zero() {
                        out.push((*la, s));
                    }
                    i += 1;
                    j += 1;
                }
                (Some((la, ea)), Some((lb, _))) if la < lb => {
                    out.push((*la, ea.clone()));
                    i += 1;
                }
                (Some(_), Some((lb, eb))) => {
                    out.push((*lb, eb.clone()));
                    j += 1;
                }
                (Some((la, ea)), None) => {
                    out.push((*la, ea.clone()));
                    i += 1;
                }
                (None, Some((lb, eb))) => {
                    out.push((*lb, eb.clone()));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial { exps: out }
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            exps: self.exps.iter().map(|(l, e)| (*l, -e)).collect(),
        }
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.inv())
    }

    pub fn pow(&self, r: &Rational) -> Monomial {
        if r.is_zero() {
            return Monomial::one();
        }
        Monomial {
            exps: self.exps.iter().map(|(l, e)| (*l, e * r)).collect(),
        }
    }

    pub fn powi(&self, n: i64) -> Monomial {
        self.pow(&int(n))
    }

    pub fn is_small(&self) -> bool {
        self.cmp(&Monomial::one()) == Ordering::Less
    }

    pub fn is_large(&self) -> bool {
        self.cmp(&Monomial::one()) == Ordering::Greater
    }

    /// Leading exponent sign decides: the first nonzero level.
    pub fn leading_level(&self) -> Option<Level> {
        self.min_level()
    }

    /// `m ∘ log`: every level moves up by one.
    pub fn shift_up(&self) -> Monomial {
        Monomial {
            exps: self.exps.iter().map(|(l, e)| (l.up(), e.clone())).collect(),
        }
    }

    /// `m ∘ exp`, when `m` has no `exp` factor.
    pub fn shift_down(&self) -> Option<Monomial> {
        let exps = self
            .exps
            .iter()
            .map(|(l, e)| l.down().map(|d| (d, e.clone())))
            .collect::<Option<Vec<_>>>()?;
        Some(Monomial { exps })
    }

    /// The part at levels `≥ 0`.
    pub fn without_exp(&self) -> Monomial {
        Monomial {
            exps: self.exps.iter().filter(|(l, _)| *l != Level::EXP).cloned().collect(),
        }
    }

    /// The logarithmic derivative of `level`: `exp'/exp = 1`, `x'/x = x⁻¹`,
    /// `log_i'/log_i = (x · log · ... · log_i)⁻¹`.
    pub fn log_derivative_factor(level: Level) -> Monomial {
        match level.get() {
            -1 => Monomial::one(),
            i => Monomial {
                exps: (0..=i).map(|j| (Level(j), -Rational::one())).collect(),
            },
        }
    }

    /// Exact derivative as a list of `(coefficient, monomial)` pairs in
    /// strictly decreasing monomial order.
    pub fn derivative(&self) -> Vec<(Rational, Monomial)> {
        let mut out: Vec<(Rational, Monomial)> = self
            .exps
            .iter()
            .map(|(l, r)| (r.clone(), self.mul(&Monomial::log_derivative_factor(*l))))
            .collect();
        // multipliers are distinct, so no two entries share a monomial
        out.sort_by(|a, b| b.1.cmp(&a.1));
        out
    }

    /// Is this `log_k` for some `k ≥ 0` (exponent exactly one)?
    pub fn as_log_level(&self) -> Option<Level> {
        match self.exps.as_slice() {
            [(l, e)] if *l >= Level::X && e.is_one() => Some(*l),
            _ => None,
        }
    }

    pub fn has_negative_exponents_only(&self) -> bool {
        self.exps.iter().all(|(_, e)| e.is_negative())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let zero = Rational::zero();
        let (a, b) = (&self.exps, &other.exps);
        let (mut i, mut j) = (0, 0);
        loop {
            let ord = match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, ea)), None) => return ea.cmp(&zero),
                (None, Some((_, eb))) => return zero.cmp(eb),
                (Some((la, ea)), Some((lb, eb))) => match la.cmp(lb) {
                    Ordering::Less => return ea.cmp(&zero),
                    Ordering::Greater => return zero.cmp(eb),
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        ea.cmp(eb)
                    }
                },
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        for (i, (l, e)) in self.exps.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if e.is_one() {
                write!(f, "{l}")?;
            } else {
                write!(f, "{l}^{}", format_rational(e))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn m(pairs: &[(i32, Rational)]) -> Monomial {
        Monomial::from_pairs(pairs.iter().map(|(l, e)| (Level(*l), e.clone())))
    }

    #[test]
    fn identity_and_inverse() {
        let a = m(&[(0, int(2)), (1, int(1))]);
        assert_eq!(Monomial::one().mul(&a), a);
        assert_eq!(a.mul(&a.inv()), Monomial::one());
        assert_eq!(Monomial::one().inv(), Monomial::one());
        assert_eq!(m(&[(-1, int(-1))]).inv(), m(&[(-1, int(1))]));
        assert_eq!(m(&[(0, rat(3, 2)), (2, int(-1))]).inv(), m(&[(0, rat(-3, 2)), (2, int(1))]));
        assert_eq!(Monomial::one().cmp(&Monomial::one()), Ordering::Equal);
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(m(&[(0, int(1))]).mul(&m(&[(0, int(-1))])), Monomial::one());
        assert_eq!(
            m(&[(-1, int(-1))]).mul(&m(&[(1, rat(-1, 2))])),
            m(&[(-1, int(-1)), (1, rat(-1, 2))])
        );
        assert_eq!(
            m(&[(0, int(2)), (1, int(1))]).mul(&m(&[(0, rat(-1, 2))])),
            m(&[(0, rat(3, 2)), (1, int(1))])
        );
    }

    #[test]
    fn lexicographic_order() {
        // exp⁻¹ < x⁻¹
        assert_eq!(m(&[(-1, int(-1))]).cmp(&m(&[(0, int(-1))])), Ordering::Less);
        // x < x log x
        assert_eq!(m(&[(0, int(1))]).cmp(&m(&[(0, int(1)), (1, int(1))])), Ordering::Less);
        let a = m(&[(0, rat(1, 3)), (2, int(-5))]);
        assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
    }

    #[test]
    fn small_and_large() {
        let one = Monomial::one();
        assert!(!one.is_small() && !one.is_large());
        let xinv = m(&[(0, int(-1))]);
        assert!(xinv.is_small() && !xinv.is_large());
        let big = m(&[(-1, int(1)), (0, int(-100))]);
        assert!(!big.is_small() && big.is_large());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(m(&[(1, int(1))]).derivative(), vec![(int(1), m(&[(0, int(-1))]))]);
        assert_eq!(m(&[(-1, int(2))]).derivative(), vec![(int(2), m(&[(-1, int(2))]))]);
        assert_eq!(
            m(&[(2, int(1))]).derivative(),
            vec![(int(1), m(&[(0, int(-1)), (1, int(-1))]))]
        );
        assert!(Monomial::one().derivative().is_empty());
    }

    #[test]
    fn text_form() {
        let a = m(&[(-1, int(-1)), (0, int(2)), (2, rat(-1, 2))]);
        assert_eq!(a.to_string(), "exp^-1 * x^2 * log[2]^-1/2");
        assert_eq!(Monomial::one().to_string(), "1");
        assert_eq!(m(&[(1, int(1))]).to_string(), "log");
    }

    #[test]
    fn shifts() {
        let a = m(&[(-1, int(-1)), (0, int(2))]);
        assert_eq!(a.shift_up(), m(&[(0, int(-1)), (1, int(2))]));
        assert_eq!(a.shift_up().shift_down(), Some(a.clone()));
        assert_eq!(a.shift_down(), None);
        assert!(Level::new(-2).is_err());
    }
}
