//! Extended-precision reals for numeric evaluation, backed by `astro-float`.
//!
//! Evaluation of truncations close to a germ needs more than 53 bits: the
//! remainder `f(x) - F_n(x)` is often twelve or more orders of magnitude
//! below `f(x)` itself.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::scalar::Rational;

/// Working precision in bits.
pub const PRECISION: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn from_f64(x: f64) -> Real {
        Real(BigFloat::from_f64(x, PRECISION))
    }

    pub fn from_i64(x: i64) -> Real {
        Real(BigFloat::from_i64(x, PRECISION))
    }

    fn from_bigint(n: &BigInt) -> Real {
        match n.to_i64() {
            Some(v) => Real::from_i64(v),
            None => {
                let s = n.to_string();
                Real(with_consts(|cc| BigFloat::parse(&s, Radix::Dec, PRECISION, RM, cc)))
            }
        }
    }

    pub fn from_rational(q: &Rational) -> Real {
        Real::from_bigint(q.numer()) / Real::from_bigint(q.denom())
    }

    pub fn zero() -> Real {
        Real::from_i64(0)
    }

    pub fn one() -> Real {
        Real::from_i64(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Real {
        if self.0.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn exp(&self) -> Real {
        Real(with_consts(|cc| self.0.exp(PRECISION, RM, cc)))
    }

    /// Natural logarithm; NaN for non-positive arguments.
    pub fn ln(&self) -> Real {
        if !self.0.is_positive() || self.0.is_zero() {
            return Real(BigFloat::nan(None));
        }
        Real(with_consts(|cc| self.0.ln(PRECISION, RM, cc)))
    }

    /// `self^r` for positive `self`.
    pub fn powr(&self, r: &Rational) -> Real {
        if r.denom() == &BigInt::from(1) {
            if let Some(n) = r.numer().to_i64() {
                if n.unsigned_abs() <= 64 {
                    let p = self.0.powi(n.unsigned_abs() as usize, PRECISION, RM);
                    let p = Real(p);
                    return if n < 0 { Real::one() / p } else { p };
                }
            }
        }
        (self.ln() * Real::from_rational(r)).exp()
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.0.is_zero() {
            return 0.0;
        }
        let s = with_consts(|cc| self.0.format(Radix::Dec, RM, cc));
        match s {
            Ok(s) => s.parse::<f64>().unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident) => {
        impl $tr for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
    };
}

bin_op!(Add, add);
bin_op!(Sub, sub);
bin_op!(Mul, mul);
bin_op!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_and_transcendentals() {
        let q = Rational::new(1.into(), 3.into());
        assert!((Real::from_rational(&q).to_f64() - 1.0 / 3.0).abs() < 1e-16);
        let e = Real::one().exp();
        assert!((e.ln().to_f64() - 1.0).abs() < 1e-30_f64.max(f64::EPSILON));
        assert!(Real::from_i64(-2).ln().to_f64().is_nan());
    }

    #[test]
    fn remainder_keeps_precision() {
        let x = Real::from_i64(1000);
        let one = Real::one();
        let f = &one / &(&one - &(&one / &x));
        let x2 = &x * &x;
        let x3 = &x2 * &x;
        let trunc = one.clone() + &one / &x + &one / &x2 + &one / &x3;
        let ratio = (f - trunc) * x3;
        assert!((ratio.to_f64() - 1.0 / 999.0).abs() < 1e-18);
    }
}
