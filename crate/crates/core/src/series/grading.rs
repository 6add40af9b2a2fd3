//! The E-grading `F = Σ_r f_r · exp^-r` with each `f_r` free of `exp`.
//!
//! Grades are recovered from how a series was built whenever possible, so
//! that a grade hidden behind an infinite block of a smaller grade can still
//! be reached. Opaque series fall back to filtering the enumeration.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::monomial::Monomial;
use crate::scalar::Rational;

use super::{Origin, Series};

fn grade(m: &Monomial) -> Rational {
    -m.exp_exponent()
}

impl Series {
    /// The grades that may occur, when there are finitely many.
    pub fn e_grades(&self) -> Option<BTreeSet<Rational>> {
        if self.is_known_zero() {
            return Some(BTreeSet::new());
        }
        if let Some(terms) = self.known_terms() {
            return Some(terms.iter().map(|t| grade(&t.mono)).collect());
        }
        let structural = match self.origin() {
            Origin::Terms | Origin::Opaque => None,
            Origin::Sum(parts) => parts.iter().try_fold(BTreeSet::new(), |mut acc, p| {
                acc.extend(p.e_grades()?);
                Some(acc)
            }),
            Origin::Scaled(_, inner) => inner.e_grades(),
            Origin::MulMono(mono, inner) => {
                let g = grade(mono);
                inner.e_grades().map(|s| s.into_iter().map(|r| r + &g).collect())
            }
            Origin::Product(a, b) => match (a.e_grades(), b.e_grades()) {
                (Some(x), Some(y)) => Some(x.iter().flat_map(|r| y.iter().map(move |s| r + s)).collect()),
                _ => None,
            },
            Origin::Truncated(inner, n) => {
                let gn = grade(n);
                inner.e_grades().map(|s| s.into_iter().filter(|r| *r <= gn).collect())
            }
        };
        structural.or_else(|| self.cert().exp_grades())
    }

    /// The terms of grade `r`, keeping their `exp^-r` factor.
    pub fn e_part(&self, r: &Rational) -> Series {
        if self.is_known_zero() || !self.cert().admits_exp_grade(r) {
            return Series::zero();
        }
        if let Some(terms) = self.known_terms() {
            return Series::from_terms(terms.into_iter().filter(|t| grade(&t.mono) == *r));
        }
        match self.origin() {
            Origin::Sum(parts) => Series::sum(parts.iter().map(|p| p.e_part(r))),
            Origin::Scaled(c, inner) => inner.e_part(r).scalar_mul(c),
            Origin::MulMono(mono, inner) => inner.e_part(&(r - grade(mono))).mul_monomial(mono),
            Origin::Product(a, b) => {
                if let Some(ga) = a.e_grades() {
                    Series::sum(ga.iter().map(|s| a.e_part(s).mul(&b.e_part(&(r - s)))))
                } else if let Some(gb) = b.e_grades() {
                    Series::sum(gb.iter().map(|s| a.e_part(&(r - s)).mul(&b.e_part(s))))
                } else {
                    self.grade_filter(r)
                }
            }
            Origin::Truncated(inner, n) => {
                let gn = grade(n);
                if *r < gn {
                    inner.e_part(r)
                } else if *r == gn {
                    inner.e_part(r).truncate_above(n)
                } else {
                    Series::zero()
                }
            }
            Origin::Terms | Origin::Opaque => match self.cert().exp_grades() {
                Some(set) if set.len() == 1 && set.contains(r) => self.clone(),
                _ => self.grade_filter(r),
            },
        }
    }

    fn grade_filter(&self, r: &Rational) -> Series {
        let (a, b) = (r.clone(), r.clone());
        self.filter_run(
            move |t| grade(&t.mono) == a,
            move |t| grade(&t.mono) > b,
            self.cert().grade_part(r),
        )
    }

    /// `f_r`: the grade-`r` part divided by `exp^-r`.
    pub fn e_coefficient(&self, r: &Rational) -> Series {
        let part = self.e_part(r);
        if r.is_zero() {
            return part;
        }
        part.mul_monomial(&Monomial::exp_power(r.clone()))
    }
}
