//! Exact coefficients.
//!
//! Almost every coefficient is a rational number. Logarithm and exponential
//! of series can produce constants `log a` and `e^c`; those are kept exact as
//! finite sums `Σ q · e^c · Π log(p)^k` with rational `q`, rational `c` and
//! primes `p` (an unfactored cofactor above 10^12 is kept as its own atom).
//! Equality is equality of normal forms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::real::Real;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Exact `n`-th root of a non-negative integer, if it exists.
fn exact_root(v: &BigUint, n: u32) -> Option<BigUint> {
    let r = v.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *v {
        Some(r)
    } else {
        None
    }
}

/// Exact rational power `q^r`, or `None` when the result is irrational.
pub fn rational_pow(q: &Rational, r: &Rational) -> Option<Rational> {
    if r.is_zero() {
        return Some(Rational::one());
    }
    if q.is_zero() {
        return if r.is_positive() { Some(Rational::zero()) } else { None };
    }
    let num = r.numer().to_i64()?;
    let den = r.denom().to_u32()?;
    if num.unsigned_abs() > 4096 {
        return None;
    }
    let base = if den == 1 {
        q.clone()
    } else {
        let neg = q.is_negative();
        if neg && den % 2 == 0 {
            return None;
        }
        let n = exact_root(q.numer().magnitude(), den)?;
        let d = exact_root(q.denom().magnitude(), den)?;
        let sign = if neg { Sign::Minus } else { Sign::Plus };
        Rational::new(BigInt::from_biguint(sign, n), BigInt::from_biguint(Sign::Plus, d))
    };
    let p = num_traits::pow(base, num.unsigned_abs() as usize);
    Some(if num < 0 { p.recip() } else { p })
}

/// Factorization by trial division; a cofactor without small prime factors
/// is returned as a single (possibly composite, when above 10^12) factor.
fn factor(n: &BigUint) -> Vec<(BigUint, i32)> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let mut p = BigUint::from(2u32);
    let limit = BigUint::from(1_000_000u32);
    while p <= limit && &p * &p <= n {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

/// A product `e^exp · Π log(p)^k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Atom {
    exp: Rational,
    logs: Vec<(BigUint, i32)>,
}

impl Atom {
    fn is_one(&self) -> bool {
        self.exp.is_zero() && self.logs.is_empty()
    }

    fn mul(&self, other: &Atom) -> Atom {
        let mut logs: BTreeMap<BigUint, i32> = self.logs.iter().cloned().collect();
        for (p, k) in &other.logs {
            *logs.entry(p.clone()).or_insert(0) += k;
        }
        Atom {
            exp: &self.exp + &other.exp,
            logs: logs.into_iter().filter(|(_, k)| *k != 0).collect(),
        }
    }

    fn to_real(&self) -> Real {
        let mut v = Real::from_rational(&self.exp).exp();
        for (p, k) in &self.logs {
            let lp = Real::from_rational(&Rational::from_integer(BigInt::from(p.clone()))).ln();
            for _ in 0..k.unsigned_abs() {
                v = if *k > 0 { &v * &lp } else { &v / &lp };
            }
        }
        v
    }
}

/// Exact coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rational),
    /// Normalized: never a single atom equal to 1.
    Symbolic(Arc<BTreeMap<Atom, Rational>>),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::Rational(q)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Rational(int(n))
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Rational(Rational::zero())
    }

    pub fn one() -> Scalar {
        Scalar::Rational(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Symbolic(_) => None,
        }
    }

    fn terms(&self) -> BTreeMap<Atom, Rational> {
        match self {
            Scalar::Rational(q) if q.is_zero() => BTreeMap::new(),
            Scalar::Rational(q) => BTreeMap::from([(Atom::default(), q.clone())]),
            Scalar::Symbolic(m) => (**m).clone(),
        }
    }

    fn from_terms(mut m: BTreeMap<Atom, Rational>) -> Scalar {
        m.retain(|_, c| !c.is_zero());
        if m.is_empty() {
            return Scalar::zero();
        }
        if m.len() == 1 {
            let (a, c) = m.iter().next().unwrap();
            if a.is_one() {
                return Scalar::Rational(c.clone());
            }
        }
        Scalar::Symbolic(Arc::new(m))
    }

    fn single_atom(&self) -> Option<(Atom, Rational)> {
        match self {
            Scalar::Rational(q) if !q.is_zero() => Some((Atom::default(), q.clone())),
            Scalar::Symbolic(m) if m.len() == 1 => m.iter().next().map(|(a, c)| (a.clone(), c.clone())),
            _ => None,
        }
    }

    /// `e^c` for rational `c`.
    pub fn exp_of_rational(c: &Rational) -> Scalar {
        Scalar::from_terms(BTreeMap::from([(
            Atom {
                exp: c.clone(),
                logs: Vec::new(),
            },
            Rational::one(),
        )]))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        if let (Scalar::Rational(a), Scalar::Rational(b)) = (self, other) {
            return Scalar::Rational(a + b);
        }
        let mut m = self.terms();
        for (a, c) in other.terms() {
            let e = m.entry(a).or_insert_with(Rational::zero);
            *e += c;
        }
        Scalar::from_terms(m)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Symbolic(m) => Scalar::Symbolic(Arc::new(m.iter().map(|(a, c)| (a.clone(), -c)).collect())),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        if let (Scalar::Rational(a), Scalar::Rational(b)) = (self, other) {
            return Scalar::Rational(a * b);
        }
        let mut m: BTreeMap<Atom, Rational> = BTreeMap::new();
        for (a1, c1) in self.terms() {
            for (a2, c2) in other.terms() {
                let e = m.entry(a1.mul(&a2)).or_insert_with(Rational::zero);
                *e += &c1 * &c2;
            }
        }
        Scalar::from_terms(m)
    }

    pub fn mul_rational(&self, q: &Rational) -> Scalar {
        self.mul(&Scalar::Rational(q.clone()))
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (a, c) = self
            .single_atom()
            .ok_or_else(|| Error::IrrationalScalar(format!("cannot invert {self}")))?;
        let atom = Atom {
            exp: -a.exp,
            logs: a.logs.into_iter().map(|(p, k)| (p, -k)).collect(),
        };
        Ok(Scalar::from_terms(BTreeMap::from([(atom, c.recip())])))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// `self^r`, exact or `IrrationalScalar`.
    pub fn pow(&self, r: &Rational) -> Result<Scalar> {
        if r.is_zero() {
            return Ok(Scalar::one());
        }
        let fail = || Error::IrrationalScalar(format!("({self})^({})", format_rational(r)));
        if self.is_zero() {
            return if r.is_positive() { Ok(Scalar::zero()) } else { Err(Error::DivisionByZero) };
        }
        let (a, c) = self.single_atom().ok_or_else(fail)?;
        let c = rational_pow(&c, r).ok_or_else(fail)?;
        let mut logs = Vec::new();
        for (p, k) in a.logs {
            let e = Rational::from_integer(BigInt::from(k)) * r;
            if !e.is_integer() {
                return Err(fail());
            }
            logs.push((p, e.to_integer().to_i32().ok_or_else(fail)?));
        }
        let atom = Atom { exp: a.exp * r, logs };
        Ok(Scalar::from_terms(BTreeMap::from([(atom, c)])))
    }

    /// Natural logarithm of a positive scalar of the form `q · e^c`.
    pub fn ln(&self) -> Result<Scalar> {
        let fail = || Error::IrrationalScalar(format!("log({self})"));
        let (a, c) = self.single_atom().ok_or_else(fail)?;
        if !a.logs.is_empty() || !c.is_positive() {
            return Err(fail());
        }
        let mut m: BTreeMap<Atom, Rational> = BTreeMap::new();
        if !a.exp.is_zero() {
            m.insert(Atom::default(), a.exp.clone());
        }
        for (n, sign) in [(c.numer().magnitude(), 1), (c.denom().magnitude(), -1)] {
            for (p, k) in factor(n) {
                let atom = Atom {
                    exp: Rational::zero(),
                    logs: vec![(p, 1)],
                };
                *m.entry(atom).or_insert_with(Rational::zero) += int(sign * k as i64);
            }
        }
        Ok(Scalar::from_terms(m))
    }

    /// `e^self` for `self = c + Σ n_p log p` with integer `n_p`.
    pub fn exp(&self) -> Result<Scalar> {
        let fail = || Error::IrrationalScalar(format!("exp({self})"));
        let mut c = Rational::zero();
        let mut factor = Rational::one();
        for (a, q) in self.terms() {
            if a.is_one() {
                c = q;
                continue;
            }
            if !a.exp.is_zero() || a.logs.len() != 1 || a.logs[0].1 != 1 || !q.is_integer() {
                return Err(fail());
            }
            let p = Rational::from_integer(BigInt::from(a.logs[0].0.clone()));
            let n = q.to_integer().to_i64().ok_or_else(fail)?;
            if n.unsigned_abs() > 4096 {
                return Err(fail());
            }
            let pp = num_traits::pow(p, n.unsigned_abs() as usize);
            factor *= if n < 0 { pp.recip() } else { pp };
        }
        Ok(Scalar::exp_of_rational(&c).mul_rational(&factor))
    }

    pub fn to_real(&self) -> Real {
        match self {
            Scalar::Rational(q) => Real::from_rational(q),
            Scalar::Symbolic(m) => m
                .iter()
                .fold(Real::zero(), |acc, (a, c)| acc + a.to_real() * Real::from_rational(c)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            s => s.to_real().to_f64(),
        }
    }

    /// Sign of the (real) value. Symbolic values are decided numerically at
    /// extended precision.
    pub fn signum(&self) -> Ordering {
        match self {
            Scalar::Rational(q) => q.cmp(&Rational::zero()),
            s => {
                let v = s.to_real();
                v.partial_cmp(&Real::zero()).unwrap_or(Ordering::Equal)
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    /// True when the text form needs parentheses as a factor.
    pub fn is_compound(&self) -> bool {
        match self {
            Scalar::Rational(_) => false,
            Scalar::Symbolic(m) => m.len() > 1,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{}", format_rational(q)),
            Scalar::Symbolic(m) => {
                for (i, (a, c)) in m.iter().enumerate() {
                    let mut factors = Vec::new();
                    if !a.exp.is_zero() {
                        factors.push(format!("expof({})", format_rational(&a.exp)));
                    }
                    for (p, k) in &a.logs {
                        if *k == 1 {
                            factors.push(format!("logof({p})"));
                        } else {
                            factors.push(format!("logof({p})^{k}"));
                        }
                    }
                    let mag = c.abs();
                    if !mag.is_one() || factors.is_empty() {
                        factors.insert(0, format_rational(&mag));
                    }
                    let body = factors.join("*");
                    match (i, c.is_negative()) {
                        (0, true) => write!(f, "-{body}")?,
                        (0, false) => write!(f, "{body}")?,
                        (_, true) => write!(f, " - {body}")?,
                        (_, false) => write!(f, " + {body}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `gcd`-free helper used by power series: `n!` as a rational.
pub fn factorial(n: u64) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rational::from_integer(acc)
}

/// Binomial coefficient `C(r, n) = r (r-1) ... (r-n+1) / n!` for rational `r`.
pub fn binomial(r: &Rational, n: u64) -> Rational {
    let mut acc = Rational::one();
    for k in 0..n {
        acc *= r - int(k as i64);
        acc /= int(k as i64 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_powers() {
        assert_eq!(rational_pow(&rat(9, 4), &rat(1, 2)), Some(rat(3, 2)));
        assert_eq!(rational_pow(&rat(8, 27), &rat(-2, 3)), Some(rat(9, 4)));
        assert_eq!(rational_pow(&int(2), &rat(1, 2)), None);
        assert_eq!(rational_pow(&int(-8), &rat(1, 3)), Some(int(-2)));
        assert_eq!(rational_pow(&int(-4), &rat(1, 2)), None);
    }

    #[test]
    fn log_and_exp_normal_forms() {
        let l6 = Scalar::from(6).ln().unwrap();
        let l2 = Scalar::from(2).ln().unwrap();
        let l3 = Scalar::from(3).ln().unwrap();
        assert_eq!(l6, l2.add(&l3));
        assert_eq!(Scalar::from(1).ln().unwrap(), Scalar::zero());
        assert_eq!(l6.exp().unwrap(), Scalar::from(6));
        let half = Scalar::Rational(rat(1, 2));
        let e_half = half.exp().unwrap();
        assert_eq!(e_half.ln().unwrap(), half);
        assert_eq!(e_half.mul(&e_half), Scalar::one().exp().unwrap());
        assert!((l2.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(Scalar::from(-2).ln().is_err());
        assert!(l2.mul_rational(&rat(1, 2)).exp().is_err());
    }

    #[test]
    fn symbolic_text() {
        let s = Scalar::from(12).ln().unwrap().add(&Scalar::from(1));
        assert_eq!(s.to_string(), "1 + 2*logof(2) + logof(3)");
        assert!(s.is_positive());
        assert!(s.inv().is_err());
        let l2 = Scalar::from(2).ln().unwrap();
        assert_eq!(l2.inv().unwrap().mul(&l2), Scalar::one());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&rat(1, 2), 2), rat(-1, 8));
        assert_eq!(binomial(&int(3), 4), int(0));
        assert_eq!(binomial(&int(-1), 3), int(-1));
    }
}
