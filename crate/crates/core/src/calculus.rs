//! Formal derivation `F′ = Σ a_m m′`.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::grid::GridCertificate;
use crate::monomial::{Level, Monomial};
use crate::series::{lazy_sum, Meter, Next, Series, Stage, StageSource, Step, Term};

/// Derivative of a single term, as a finite series.
pub fn term_derivative(t: &Term) -> Series {
    Series::from_terms(t.mono.derivative().into_iter().map(|(r, m)| Term {
        coeff: t.coeff.mul_rational(&r),
        mono: m,
    }))
}

/// Multipliers `m′/m` can pick up over the given levels.
fn multipliers(levels: &BTreeSet<Level>) -> GridCertificate {
    GridCertificate::finite(levels.iter().map(|l| Monomial::log_derivative_factor(*l)))
}

struct TermStages {
    source: Series,
    pos: usize,
}

/// `m·(log-derivative factor of m's lowest level)`, an upper bound for the
/// support of `m′`. Strictly increasing in `m`.
fn derivative_bound(m: &Monomial) -> Monomial {
    match m.min_level() {
        Some(l) => m.mul(&Monomial::log_derivative_factor(l)),
        None => m.clone(),
    }
}

impl StageSource for TermStages {
    fn next_stage(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Next> {
        match self.source.read(self.pos, floor, m)? {
            Step::Term(t) => {
                self.pos += 1;
                let bound = derivative_bound(&t.mono);
                Ok(Next::Stage(Stage::new(term_derivative(&t), Some(bound))))
            }
            Step::Done => Ok(Next::Done),
            Step::Below => Ok(Next::Below),
        }
    }
}

/// `F′`. Stage `k` is the derivative of the `k`-th term, bounded by
/// [`derivative_bound`].
pub fn derivative(f: &Series) -> Series {
    if let Some(terms) = f.known_terms() {
        return Series::from_terms(terms.iter().flat_map(|t| {
            t.mono.derivative().into_iter().map(|(r, m)| Term {
                coeff: t.coeff.mul_rational(&r),
                mono: m,
            })
        }));
    }
    let cert = f.cert().product(&multipliers(&f.cert().levels())).pruned();
    lazy_sum(
        "derivative",
        TermStages {
            source: f.clone(),
            pos: 0,
        },
        cert,
    )
}

/// `F⁽ⁱ⁾`.
pub fn nth_derivative(f: &Series, i: usize) -> Series {
    (0..i).fold(f.clone(), |acc, _| derivative(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{compose_ps1, PowerSeries1};
    use crate::scalar::{int, rat};
    use crate::series::Budget;

    fn b() -> Budget {
        Budget::default()
    }

    fn lv(i: i32) -> Level {
        Level::new(i).unwrap()
    }

    fn xp(n: i64) -> Monomial {
        Monomial::factor(lv(0), int(n))
    }

    #[test]
    fn power_rule_on_geometric_tail() {
        let tail = compose_ps1(&PowerSeries1::geom(), &Series::monomial(xp(-1)), &b())
            .unwrap()
            .sub(&Series::constant(1));
        let d = derivative(&tail).terms_prefix(4, &b()).unwrap();
        let want: Vec<Term> = (1..=4).map(|n| Term::new(int(-n), xp(-n - 1))).collect();
        assert_eq!(d, want);
        assert!(derivative(&tail).verify_prefix(10, &b()).is_ok());
    }

    #[test]
    fn examples() {
        assert!(derivative(&Series::constant(7)).terms_prefix(3, &b()).unwrap().is_empty());
        let m = Monomial::from_pairs([(lv(-1), int(-1)), (lv(1), int(2))]);
        let d = derivative(&Series::monomial(m.clone())).terms_prefix(5, &b()).unwrap();
        let second = m.mul(&Monomial::from_pairs([(lv(0), int(-1)), (lv(1), int(-1))]));
        assert_eq!(d, vec![Term::new(int(-1), m), Term::new(int(2), second)]);
        let x2 = Series::monomial(xp(2));
        assert_eq!(nth_derivative(&x2, 2).terms_prefix(3, &b()).unwrap(), vec![Term::new(int(2), Monomial::one())]);
        assert_eq!(nth_derivative(&x2, 0).terms_prefix(3, &b()).unwrap(), x2.terms_prefix(3, &b()).unwrap());
        let e = Series::monomial(Monomial::exp_power(int(1)));
        assert_eq!(nth_derivative(&e, 3).terms_prefix(3, &b()).unwrap(), e.terms_prefix(3, &b()).unwrap());
        let log = Series::monomial(Monomial::factor(lv(1), int(1)));
        assert_eq!(derivative(&log).terms_prefix(2, &b()).unwrap(), vec![Term::new(int(1), xp(-1))]);
        let root = Series::monomial(Monomial::factor(lv(0), rat(1, 2)));
        assert_eq!(
            derivative(&root).terms_prefix(2, &b()).unwrap(),
            vec![Term::new(rat(1, 2), Monomial::factor(lv(0), rat(-1, 2)))]
        );
    }

    #[test]
    fn floors_reach_past_cancelling_sources() {
        let one_minus = Series::from_terms([Term::new(int(1), Monomial::one()), Term::new(int(-1), xp(-1))]);
        let geom = compose_ps1(&PowerSeries1::geom(), &Series::monomial(xp(-1)), &b()).unwrap();
        let unit = one_minus.mul(&geom).mul_monomial(&xp(1));
        let d = derivative(&unit);
        assert_eq!(d.terms_down_to(&xp(-12), &b()).unwrap(), vec![Term::new(int(1), Monomial::one())]);
        assert!(d.agrees_with(&Series::constant(1), 8, &b()).unwrap());
    }
}
