//! Division, rational powers and substitution into one-variable power series.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::scalar::{binomial, factorial, Rational, Scalar};
use crate::series::{lazy_sum, Budget, Meter, Next, Series, Stage, StageSource, Term};

/// `Σ c_n Xⁿ` given by a coefficient generator.
#[derive(Clone)]
pub struct PowerSeries1 {
    label: String,
    coeff: Arc<dyn Fn(u64) -> Rational + Send + Sync>,
    degree: Option<u64>,
}

impl fmt::Debug for PowerSeries1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl PowerSeries1 {
    /// `degree`, when known, bounds the nonzero coefficients.
    pub fn new(
        label: impl Into<String>,
        coeff: impl Fn(u64) -> Rational + Send + Sync + 'static,
        degree: Option<u64>,
    ) -> PowerSeries1 {
        PowerSeries1 {
            label: label.into(),
            coeff: Arc::new(coeff),
            degree,
        }
    }

    /// `Σ Xⁿ`.
    pub fn geom() -> PowerSeries1 {
        PowerSeries1::new("geom", |_| Rational::one(), None)
    }

    /// Taylor series of `log(1+X)`.
    pub fn log() -> PowerSeries1 {
        PowerSeries1::new(
            "F_log",
            |n| match n {
                0 => Rational::zero(),
                n if n % 2 == 1 => Rational::new(1.into(), (n as i64).into()),
                n => Rational::new((-1).into(), (n as i64).into()),
            },
            None,
        )
    }

    /// Taylor series of `(1+X)^r`.
    pub fn binomial(r: Rational) -> PowerSeries1 {
        let degree = (r.is_integer() && !r.is_negative()).then(|| r.to_integer().to_u64()).flatten();
        let label = format!("P_{r}");
        PowerSeries1::new(label, move |n| binomial(&r, n), degree)
    }

    /// Taylor series of `exp(rX)`.
    pub fn exp(r: Rational) -> PowerSeries1 {
        let degree = r.is_zero().then_some(0);
        let label = format!("F_exp^{r}");
        PowerSeries1::new(
            label,
            move |n| num_traits::pow(r.clone(), n as usize) / factorial(n),
            degree,
        )
    }

    pub fn coeff(&self, n: u64) -> Rational {
        if self.degree.is_some_and(|d| n > d) {
            return Rational::zero();
        }
        (self.coeff)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> Option<u64> {
        self.degree
    }
}

struct Ps1Stages {
    p: PowerSeries1,
    eps: Series,
    lead: Monomial,
    n: u64,
    power: Series,
}

impl StageSource for Ps1Stages {
    fn next_stage(&mut self, _floor: Option<&Monomial>, m: &Meter) -> Result<Next> {
        loop {
            if self.p.degree.is_some_and(|d| self.n > d) {
                return Ok(Next::Done);
            }
            m.tick()?;
            let n = self.n;
            let power = if n == 0 { Series::constant(1) } else { self.power.mul(&self.eps) };
            self.power = power.clone();
            self.n += 1;
            let c = self.p.coeff(n);
            if c.is_zero() {
                continue;
            }
            let bound = self.lead.powi(n as i64);
            return Ok(Next::Stage(Stage::new(power.scalar_mul_rational(&c), Some(bound))));
        }
    }
}

/// `P ∘ ε = Σ c_n εⁿ` for small `ε`.
pub fn compose_ps1(p: &PowerSeries1, eps: &Series, budget: &Budget) -> Result<Series> {
    compose_ps1_with(p, eps, &Meter::new(*budget))
}

pub(crate) fn compose_ps1_with(p: &PowerSeries1, eps: &Series, m: &Meter) -> Result<Series> {
    let Some(lead) = eps.lead_with(m)? else {
        return Ok(Series::constant(Scalar::from(p.coeff(0))));
    };
    if !lead.mono.is_small() {
        return Err(Error::NotSmall(lead.mono.to_string()).in_op(format!("compose {}", p.label)));
    }
    if let Some(d) = p.degree {
        // a polynomial: a finite sum is cheaper than staging
        let mut acc = Vec::new();
        let mut power = Series::constant(1);
        for n in 0..=d {
            let c = p.coeff(n);
            if !c.is_zero() {
                acc.push(power.scalar_mul_rational(&c));
            }
            if n < d {
                power = power.mul(eps);
            }
        }
        return Ok(Series::sum(acc));
    }
    let cert = eps.cert().geometric();
    Ok(lazy_sum(
        format!("{} ∘ ε", p.label),
        Ps1Stages {
            p: p.clone(),
            eps: eps.clone(),
            lead: lead.mono,
            n: 0,
            power: Series::constant(1),
        },
        cert,
    ))
}

/// `G = a·g·(1 + ε)` split at the full leading term.
pub(crate) fn split_leading(g: &Series, m: &Meter) -> Result<(Term, Series)> {
    let lead = g.lead_with(m)?.ok_or(Error::DivisionByZero)?;
    let inv = Term {
        coeff: lead.coeff.inv()?,
        mono: lead.mono.inv(),
    };
    let eps = g.sub(&Series::from_terms([lead.clone()])).mul_term(&inv);
    Ok((lead, eps))
}

/// `F / G = F · a⁻¹g⁻¹ · geom(−ε)`.
pub fn divide(f: &Series, g: &Series, budget: &Budget) -> Result<Series> {
    divide_with(f, g, &Meter::new(*budget))
}

pub(crate) fn divide_with(f: &Series, g: &Series, m: &Meter) -> Result<Series> {
    if let (Some(a), Some(b)) = (f.known_terms(), g.known_terms()) {
        if let Some(q) = exact_quotient(&a, &b)? {
            return Ok(q);
        }
    }
    let (lead, eps) = split_leading(g, m)?;
    let inv = Term {
        coeff: lead.coeff.inv()?,
        mono: lead.mono.inv(),
    };
    let f = f.mul_term(&inv);
    if eps.is_known_zero() {
        return Ok(f);
    }
    let q = compose_ps1_with(&PowerSeries1::geom(), &eps.negate(), m)?;
    Ok(f.mul(&q))
}

/// Long division of finite series, when it terminates quickly.
fn exact_quotient(f: &[Term], g: &[Term]) -> Result<Option<Series>> {
    let Some(lead) = g.first() else {
        return Err(Error::DivisionByZero);
    };
    let g = Series::from_terms(g.iter().cloned());
    let mut rem = f.to_vec();
    let mut quotient = Vec::new();
    for _ in 0..64 {
        let Some(top) = rem.first() else {
            return Ok(Some(Series::from_terms(quotient)));
        };
        let q = Term {
            coeff: top.coeff.div(&lead.coeff)?,
            mono: top.mono.div(&lead.mono),
        };
        let sub = g.mul_term(&q).known_terms().expect("finite");
        rem = Series::from_terms(rem.into_iter().chain(sub.into_iter().map(|t| Term {
            coeff: t.coeff.neg(),
            mono: t.mono,
        })))
        .known_terms()
        .expect("finite");
        quotient.push(q);
    }
    Ok(None)
}

/// `G^r = a^r g^r · P_r(ε)`.
pub fn power(g: &Series, r: &Rational, budget: &Budget) -> Result<Series> {
    power_with(g, r, &Meter::new(*budget))
}

pub(crate) fn power_with(g: &Series, r: &Rational, m: &Meter) -> Result<Series> {
    if r.is_zero() {
        return Ok(Series::constant(1));
    }
    if r.is_one() {
        return Ok(g.clone());
    }
    let (lead, eps) = split_leading(g, m)?;
    let scale = Term {
        coeff: lead.coeff.pow(r).map_err(|e| e.in_op("power"))?,
        mono: lead.mono.pow(r),
    };
    if eps.is_known_zero() {
        return Ok(Series::from_terms([scale]));
    }
    let body = compose_ps1_with(&PowerSeries1::binomial(r.clone()), &eps, m)?;
    Ok(body.mul_term(&scale))
}

/// `1/G`.
pub fn reciprocal(g: &Series, budget: &Budget) -> Result<Series> {
    divide(&Series::constant(1), g, budget)
}

/// The pieces of `F = head · exp^-d · (1 + eps)`.
#[derive(Clone, Debug)]
pub struct LeadingDecomposition {
    pub d: Rational,
    pub head: Series,
    pub eps: Series,
}

impl Series {
    /// `F` minus its grade-`r` part, without walking through that part when
    /// the grading is known.
    pub fn without_grade(&self, r: &Rational) -> Series {
        match self.e_grades() {
            Some(grades) => Series::sum(grades.iter().filter(|s| *s != r).map(|s| self.e_part(s))),
            None => self.sub(&self.e_part(r)),
        }
    }

    /// `F = head · exp^-d · (1 + eps)` with `d = ord(F)` and `ord(eps) > 0`.
    pub fn decompose_leading(&self, budget: &Budget) -> Result<LeadingDecomposition> {
        let m = Meter::new(*budget);
        let d = self.exp_order_with(&m)?;
        let head = self.e_coefficient(&d);
        let scale = Monomial::exp_power(-d.clone());
        let lead_part = head.mul_monomial(&scale);
        let rest = self.without_grade(&d);
        let eps = if rest.is_known_zero() {
            Series::zero()
        } else {
            divide_with(&rest, &lead_part, &m)?
        };
        Ok(LeadingDecomposition { d, head, eps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::Level;
    use crate::scalar::{int, rat};

    fn b() -> Budget {
        Budget::default()
    }

    fn xpow(n: i64) -> Monomial {
        Monomial::factor(Level::X, int(n))
    }

    fn t(c: i64, m: Monomial) -> Term {
        Term::new(c, m)
    }

    #[test]
    fn coefficients() {
        assert_eq!(PowerSeries1::log().coeff(3), rat(1, 3));
        assert_eq!(PowerSeries1::log().coeff(4), rat(-1, 4));
        assert_eq!(PowerSeries1::binomial(rat(1, 2)).coeff(2), rat(-1, 8));
        assert_eq!(PowerSeries1::exp(int(0)).coeff(0), int(1));
        assert_eq!(PowerSeries1::exp(int(0)).coeff(5), int(0));
        assert_eq!(PowerSeries1::exp(int(2)).coeff(3), rat(8, 6));
    }

    #[test]
    fn geometric_and_log_substitution() {
        let g = compose_ps1(&PowerSeries1::geom(), &Series::monomial(xpow(-1)), &b()).unwrap();
        let p = g.terms_prefix(4, &b()).unwrap();
        assert_eq!(p, (0..4).map(|n| t(1, xpow(-n))).collect::<Vec<_>>());
        let e = Monomial::exp_power(int(-1));
        let l = compose_ps1(&PowerSeries1::log(), &Series::monomial(e.clone()), &b()).unwrap();
        let p = l.terms_prefix(3, &b()).unwrap();
        assert_eq!(p[0], t(1, e.clone()));
        assert_eq!(p[1], Term::new(rat(-1, 2), e.powi(2)));
        assert_eq!(p[2], Term::new(rat(1, 3), e.powi(3)));
        let c = compose_ps1(&PowerSeries1::exp(int(1)), &Series::zero(), &b()).unwrap();
        assert_eq!(c.terms_prefix(3, &b()).unwrap(), vec![t(1, Monomial::one())]);
    }

    #[test]
    fn not_small_rejected() {
        let err = compose_ps1(&PowerSeries1::geom(), &Series::x(), &b()).unwrap_err();
        assert_eq!(err.kind(), "NotSmall");
    }

    #[test]
    fn division_examples() {
        let one_minus = Series::from_terms([t(1, Monomial::one()), t(-1, xpow(-1))]);
        let q = divide(&Series::constant(1), &one_minus, &b()).unwrap();
        assert_eq!(q.terms_prefix(5, &b()).unwrap(), (0..5).map(|n| t(1, xpow(-n))).collect::<Vec<_>>());
        let x2 = Series::monomial(xpow(2));
        assert_eq!(
            divide(&x2, &Series::x(), &b()).unwrap().terms_prefix(3, &b()).unwrap(),
            vec![t(1, xpow(1))]
        );
        let f = Series::from_terms([t(3, xpow(1)), t(2, Monomial::exp_power(int(-1)))]);
        assert_eq!(
            divide(&f, &f, &b()).unwrap().terms_prefix(3, &b()).unwrap(),
            vec![t(1, Monomial::one())]
        );
        assert_eq!(divide(&f, &Series::zero(), &b()).unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn square_root_binomial() {
        let g = Series::from_terms([t(1, xpow(1)), t(1, Monomial::one())]);
        let p = power(&g, &rat(1, 2), &b()).unwrap().terms_prefix(3, &b()).unwrap();
        let half = |k: i64| Monomial::factor(Level::X, rat(1, 2) - int(k));
        assert_eq!(p, vec![t(1, half(0)), Term::new(rat(1, 2), half(1)), Term::new(rat(-1, 8), half(2))]);
        let two = Series::from_terms([t(2, xpow(1))]);
        assert_eq!(power(&two, &rat(1, 2), &b()).unwrap_err().kind(), "IrrationalScalar");
        assert_eq!(
            power(&g, &int(0), &b()).unwrap().terms_prefix(2, &b()).unwrap(),
            vec![t(1, Monomial::one())]
        );
    }

    #[test]
    fn leading_decomposition() {
        let e1 = Monomial::exp_power(int(-1));
        let e2 = Monomial::exp_power(int(-2));
        let f = Series::from_terms([t(2, e1.clone()), t(1, e2.mul(&xpow(-1)))]);
        let dec = f.decompose_leading(&b()).unwrap();
        assert_eq!(dec.d, int(1));
        assert_eq!(dec.head.terms_prefix(3, &b()).unwrap(), vec![t(2, Monomial::one())]);
        assert_eq!(
            dec.eps.terms_prefix(3, &b()).unwrap(),
            vec![Term::new(rat(1, 2), e1.mul(&xpow(-1)))]
        );
        let dec = Series::monomial(xpow(-1)).decompose_leading(&b()).unwrap();
        assert_eq!(dec.d, int(0));
        assert!(dec.eps.terms_prefix(1, &b()).unwrap().is_empty());
        let dec = Series::monomial(Monomial::exp_power(int(2))).decompose_leading(&b()).unwrap();
        assert_eq!(dec.d, int(-2));
    }
}
