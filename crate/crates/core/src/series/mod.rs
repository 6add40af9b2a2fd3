//! Lazily enumerated series `Σ a_m m` with strictly decreasing support.
//!
//! A [`Series`] is a cheap handle to a shared node holding a grid
//! certificate, a memo of the terms produced so far and the producer that
//! extends it. Observations run under a [`Meter`] built from a [`Budget`];
//! running out of budget is reported as [`Error::BudgetExhausted`] and leaves
//! the series resumable.

mod grading;
mod lazy_sum;
pub mod producers;

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use num_traits::{Signed, Zero};

use crate::error::{BudgetLimit, Error, Result};
use crate::grid::GridCertificate;
use crate::monomial::{Level, Monomial};
use crate::scalar::{format_rational, int, Rational, Scalar};

pub use lazy_sum::{lazy_sum, Next, Stage, StageSource};
use producers::{Filter, Map, Merge, Preimage, Product, TakeAbove};

#[derive(Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Scalar,
    pub mono: Monomial,
}

impl Term {
    pub fn new(coeff: impl Into<Scalar>, mono: Monomial) -> Term {
        Term {
            coeff: coeff.into(),
            mono,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coeff;
        if self.mono.is_one() {
            return if c.is_compound() { write!(f, "({c})") } else { write!(f, "{c}") };
        }
        if c.is_one() {
            write!(f, "{}", self.mono)
        } else if c.is_compound() {
            write!(f, "({c})*{}", self.mono)
        } else {
            write!(f, "{c}*{}", self.mono)
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Observation limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest memo any single series may grow to.
    pub max_terms: usize,
    /// Producer steps allowed per observation.
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_terms: 10_000,
            max_steps: 1_000_000,
        }
    }
}

impl Budget {
    pub fn new(max_terms: usize, max_steps: u64) -> Result<Budget> {
        if max_terms == 0 || max_steps == 0 {
            return Err(Error::MalformedInput("budget limits must be positive".into()));
        }
        Ok(Budget { max_terms, max_steps })
    }

    /// Parses `terms=N,steps=M` (either key optional) or `N,M`.
    pub fn parse(text: &str) -> Result<Budget> {
        let bad = || Error::MalformedInput(format!("budget `{text}`: expected terms=N,steps=M"));
        let mut b = Budget::default();
        let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if parts.is_empty() {
            return Err(bad());
        }
        for (i, part) in parts.iter().enumerate() {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None if i == 0 => ("terms", *part),
                None if i == 1 => ("steps", *part),
                None => return Err(bad()),
            };
            match key {
                "terms" => b.max_terms = value.parse().map_err(|_| bad())?,
                "steps" => b.max_steps = value.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        Budget::new(b.max_terms, b.max_steps)
    }

    /// Budget from `LOGFIELD_BUDGET`, or the default.
    pub fn from_env() -> Result<Budget> {
        match std::env::var("LOGFIELD_BUDGET") {
            Ok(s) => Budget::parse(&s),
            Err(_) => Ok(Budget::default()),
        }
    }
}

/// Step counter for one observation.
pub struct Meter {
    budget: Budget,
    steps: Cell<u64>,
}

impl Meter {
    pub fn new(budget: Budget) -> Meter {
        Meter {
            budget,
            steps: Cell::new(0),
        }
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn steps(&self) -> u64 {
        self.steps.get()
    }

    pub fn tick(&self) -> Result<()> {
        let s = self.steps.get() + 1;
        if s > self.budget.max_steps {
            return Err(Error::BudgetExhausted {
                limit: BudgetLimit::Steps,
                max: self.budget.max_steps,
            });
        }
        self.steps.set(s);
        Ok(())
    }
}

/// Outcome of asking for the next term.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Term(Term),
    /// No further terms.
    Done,
    /// The next term, if any, lies below the floor that was passed in.
    Below,
}

/// Produces the terms of one series, in strictly decreasing order.
///
/// With a floor, a producer may answer [`Step::Below`] instead of searching
/// for a term under it; this is what lets truncations terminate in the
/// presence of endless cancellation further down. A producer that returns a
/// budget error must be able to continue later as if the failing call never
/// happened.
pub trait Producer: Send {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step>;
}

/// How a series was built, for structural E-grading.
#[derive(Clone)]
pub(crate) enum Origin {
    Terms,
    Sum(Vec<Series>),
    Scaled(Scalar, Series),
    MulMono(Monomial, Series),
    Product(Series, Series),
    Truncated(Series, Monomial),
    Opaque,
}

struct State {
    producer: Option<Box<dyn Producer>>,
    failure: Option<Error>,
    /// `(n, f)`: term `n` is known to lie below `f`.
    below: Option<(usize, Monomial)>,
}

struct Node {
    cert: GridCertificate,
    origin: Origin,
    memo: RwLock<Vec<Term>>,
    done: AtomicBool,
    state: Mutex<State>,
}

#[derive(Clone)]
pub struct Series(Arc<Node>);

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let memo = self.0.memo.read().unwrap_or_else(|e| e.into_inner());
        let done = self.0.done.load(AtomicOrdering::Acquire);
        write!(f, "Series[")?;
        for (i, t) in memo.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "{}]", if done { "" } else { ", ..." })
    }
}

/// Result of observing a prefix.
#[derive(Clone, Debug)]
pub struct Prefix {
    pub terms: Vec<Term>,
    /// The whole series was produced.
    pub exhausted: bool,
    /// The observation stopped early on this budget error.
    pub budget_hit: Option<Error>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Series {
    pub(crate) fn build(producer: impl Producer + 'static, cert: GridCertificate, origin: Origin) -> Series {
        Series(Arc::new(Node {
            cert,
            origin,
            memo: RwLock::new(Vec::new()),
            done: AtomicBool::new(false),
            state: Mutex::new(State {
                producer: Some(Box::new(producer)),
                failure: None,
                below: None,
            }),
        }))
    }

    fn settled(terms: Vec<Term>, cert: GridCertificate) -> Series {
        Series(Arc::new(Node {
            cert,
            origin: Origin::Terms,
            memo: RwLock::new(terms),
            done: AtomicBool::new(true),
            state: Mutex::new(State {
                producer: None,
                failure: None,
                below: None,
            }),
        }))
    }

    pub fn zero() -> Series {
        Series::settled(Vec::new(), GridCertificate::empty())
    }

    /// Canonicalizes an arbitrary finite list: merges equal monomials, drops
    /// zeros, sorts decreasingly.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Series {
        let mut acc: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for t in terms {
            let e = acc.entry(t.mono).or_default();
            *e = e.add(&t.coeff);
        }
        let terms: Vec<Term> = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(mono, coeff)| Term { coeff, mono })
            .collect();
        let cert = GridCertificate::finite(terms.iter().map(|t| t.mono.clone()));
        Series::settled(terms, cert)
    }

    pub fn constant(c: impl Into<Scalar>) -> Series {
        Series::from_terms([Term::new(c, Monomial::one())])
    }

    pub fn monomial(m: Monomial) -> Series {
        Series::from_terms([Term::new(1, m)])
    }

    pub fn term(c: impl Into<Scalar>, m: Monomial) -> Series {
        Series::from_terms([Term::new(c, m)])
    }

    /// `x`.
    pub fn x() -> Series {
        Series::monomial(Monomial::x())
    }

    pub fn cert(&self) -> &GridCertificate {
        &self.0.cert
    }

    pub(crate) fn origin(&self) -> &Origin {
        &self.0.origin
    }

    /// Same value, same handle.
    pub fn ptr_eq(&self, other: &Series) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Zero without observing anything (empty certificate).
    pub fn is_known_zero(&self) -> bool {
        self.0.cert.is_empty()
    }

    /// The settled terms when the series is fully produced.
    pub fn known_terms(&self) -> Option<Vec<Term>> {
        self.0
            .done
            .load(AtomicOrdering::Acquire)
            .then(|| self.0.memo.read().unwrap_or_else(|e| e.into_inner()).clone())
    }

    /// The `i`-th term, producing as needed.
    pub fn term_at(&self, i: usize, m: &Meter) -> Result<Option<Term>> {
        match self.read(i, None, m)? {
            Step::Term(t) => Ok(Some(t)),
            _ => Ok(None),
        }
    }

    /// The `i`-th term, or [`Step::Below`] once it is known to lie below
    /// `floor`.
    pub fn read(&self, i: usize, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        let done = self.0.done.load(AtomicOrdering::Acquire);
        {
            let memo = self.0.memo.read().unwrap_or_else(|e| e.into_inner());
            if i < memo.len() {
                return Ok(Step::Term(memo[i].clone()));
            }
            if done {
                return Ok(Step::Done);
            }
            if floor.is_some_and(|f| memo.last().is_some_and(|t| t.mono <= *f)) {
                return Ok(Step::Below);
            }
        }
        let mut st = lock(&self.0.state);
        loop {
            let len = {
                let memo = self.0.memo.read().unwrap_or_else(|e| e.into_inner());
                if i < memo.len() {
                    return Ok(Step::Term(memo[i].clone()));
                }
                memo.len()
            };
            if let Some(e) = &st.failure {
                return Err(e.clone());
            }
            if let (Some(f), Some((n, known))) = (floor, &st.below) {
                if *n == len && known <= f {
                    return Ok(Step::Below);
                }
            }
            let Some(p) = st.producer.as_mut() else {
                return Ok(Step::Done);
            };
            if len >= m.budget.max_terms {
                return Err(Error::BudgetExhausted {
                    limit: BudgetLimit::Terms,
                    max: m.budget.max_terms as u64,
                });
            }
            m.tick()?;
            match p.next(floor, m) {
                Ok(Step::Term(t)) => {
                    let mut memo = self.0.memo.write().unwrap_or_else(|e| e.into_inner());
                    debug_assert!(!t.coeff.is_zero(), "zero coefficient produced");
                    debug_assert!(
                        memo.last().map_or(true, |last| last.mono > t.mono),
                        "non-decreasing production: {:?} then {}",
                        memo.last(),
                        t
                    );
                    memo.push(t);
                }
                Ok(Step::Done) => {
                    st.producer = None;
                    self.0.done.store(true, AtomicOrdering::Release);
                    return Ok(Step::Done);
                }
                Ok(Step::Below) => {
                    if let Some(f) = floor {
                        let lower = match &st.below {
                            Some((n, known)) if *n == len => f < known,
                            _ => true,
                        };
                        if lower {
                            st.below = Some((len, f.clone()));
                        }
                    }
                    return Ok(Step::Below);
                }
                Err(e) if e.is_budget() => return Err(e),
                Err(e) => {
                    st.producer = None;
                    st.failure = Some(e.clone());
                    return Err(e);
                }
            }
        }
    }

    /// Every term `≥ floor`. Terminates for grid-based series even when the
    /// part below `floor` cancels forever.
    pub fn terms_down_to(&self, floor: &Monomial, budget: &Budget) -> Result<Vec<Term>> {
        self.down_to_with(floor, &Meter::new(*budget))
    }

    pub(crate) fn down_to_with(&self, floor: &Monomial, m: &Meter) -> Result<Vec<Term>> {
        let mut out = Vec::new();
        for i in 0.. {
            match self.read(i, Some(floor), m)? {
                Step::Term(t) if t.mono >= *floor => out.push(t),
                _ => break,
            }
        }
        Ok(out)
    }

    /// Up to `k` leading terms strictly above `floor`.
    pub fn terms_above(&self, floor: &Monomial, k: usize, budget: &Budget) -> Result<Vec<Term>> {
        let m = Meter::new(*budget);
        let mut out = Vec::new();
        for i in 0..k {
            match self.read(i, Some(floor), &m)? {
                Step::Term(t) if t.mono > *floor => out.push(t),
                _ => break,
            }
        }
        Ok(out)
    }

    /// Up to `k` terms under a fresh meter.
    pub fn terms_prefix(&self, k: usize, budget: &Budget) -> Result<Vec<Term>> {
        self.prefix_with(k, &Meter::new(*budget))
    }

    pub fn prefix_with(&self, k: usize, m: &Meter) -> Result<Vec<Term>> {
        let mut out = Vec::with_capacity(k.min(64));
        for i in 0..k {
            match self.term_at(i, m)? {
                Some(t) => out.push(t),
                None => break,
            }
        }
        Ok(out)
    }

    /// Like [`terms_prefix`](Self::terms_prefix) but keeps whatever was
    /// produced when the budget runs out.
    pub fn observe(&self, k: usize, budget: &Budget) -> Result<Prefix> {
        let m = Meter::new(*budget);
        let mut terms = Vec::new();
        for i in 0..k {
            match self.term_at(i, &m) {
                Ok(Some(t)) => terms.push(t),
                Ok(None) => {
                    return Ok(Prefix {
                        terms,
                        exhausted: true,
                        budget_hit: None,
                    })
                }
                Err(e) if e.is_budget() => {
                    return Ok(Prefix {
                        terms,
                        exhausted: false,
                        budget_hit: Some(e),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        let exhausted = self.term_at(k, &m).map(|t| t.is_none()).unwrap_or(false);
        Ok(Prefix {
            terms,
            exhausted,
            budget_hit: None,
        })
    }

    pub fn leading_term(&self, budget: &Budget) -> Result<Option<Term>> {
        self.term_at(0, &Meter::new(*budget))
    }

    pub(crate) fn lead_with(&self, m: &Meter) -> Result<Option<Term>> {
        self.term_at(0, m)
    }

    /// The leading term of a series that must be nonzero.
    pub(crate) fn nonzero_lead(&self, m: &Meter) -> Result<Term> {
        self.term_at(0, m)?.ok_or(Error::ZeroSeries)
    }

    pub fn add(&self, other: &Series) -> Series {
        Series::sum([self.clone(), other.clone()])
    }

    /// Finite sum, flattening nested sums.
    pub fn sum(items: impl IntoIterator<Item = Series>) -> Series {
        let mut parts: Vec<Series> = Vec::new();
        for s in items {
            if s.is_known_zero() {
                continue;
            }
            match s.origin() {
                Origin::Sum(inner) => parts.extend(inner.iter().cloned()),
                _ => parts.push(s),
            }
        }
        match parts.len() {
            0 => Series::zero(),
            1 => parts.pop().unwrap(),
            _ => {
                let cert = parts
                    .iter()
                    .fold(GridCertificate::empty(), |acc, s| acc.union(s.cert()));
                Series::build(Merge::new(parts.clone()), cert, Origin::Sum(parts))
            }
        }
    }

    pub fn negate(&self) -> Series {
        self.scalar_mul(&Scalar::from(-1))
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.negate())
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Series {
        if c.is_zero() || self.is_known_zero() {
            return Series::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        if let Some(terms) = self.known_terms() {
            return Series::from_terms(terms.into_iter().map(|t| Term {
                coeff: t.coeff.mul(c),
                mono: t.mono,
            }));
        }
        let (c2, inner) = match self.origin() {
            Origin::Scaled(d, inner) => (d.mul(c), inner.clone()),
            _ => (c.clone(), self.clone()),
        };
        let k = c2.clone();
        Series::build(
            Map::new(
                inner.clone(),
                move |t| Term {
                    coeff: t.coeff.mul(&k),
                    mono: t.mono,
                },
                |f: &Monomial| Preimage::At(f.clone()),
            ),
            inner.cert().clone(),
            Origin::Scaled(c2, inner),
        )
    }

    pub fn scalar_mul_rational(&self, q: &Rational) -> Series {
        self.scalar_mul(&Scalar::from(q.clone()))
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Series {
        if mono.is_one() || self.is_known_zero() {
            return self.clone();
        }
        if let Some(terms) = self.known_terms() {
            return Series::from_terms(terms.into_iter().map(|t| Term {
                coeff: t.coeff,
                mono: t.mono.mul(mono),
            }));
        }
        let (m2, inner) = match self.origin() {
            Origin::MulMono(n, inner) => (n.mul(mono), inner.clone()),
            _ => (mono.clone(), self.clone()),
        };
        if m2.is_one() {
            return inner;
        }
        let (k, k_inv) = (m2.clone(), m2.inv());
        Series::build(
            Map::new(
                inner.clone(),
                move |t| Term {
                    coeff: t.coeff,
                    mono: t.mono.mul(&k),
                },
                move |f: &Monomial| Preimage::At(f.mul(&k_inv)),
            ),
            inner.cert().scale(&m2),
            Origin::MulMono(m2, inner),
        )
    }

    /// `c · m · self`.
    pub fn mul_term(&self, t: &Term) -> Series {
        self.mul_monomial(&t.mono).scalar_mul(&t.coeff)
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Series) -> Series {
        if self.is_known_zero() || other.is_known_zero() {
            return Series::zero();
        }
        for (a, b) in [(self, other), (other, self)] {
            if let Some(terms) = a.known_terms() {
                if terms.len() == 1 {
                    return b.mul_term(&terms[0]);
                }
            }
        }
        Series::build(
            Product::new(self.clone(), other.clone()),
            self.cert().product(other.cert()),
            Origin::Product(self.clone(), other.clone()),
        )
    }

    /// `self^n` for `n ≥ 0` by repeated squaring.
    pub fn powi(&self, n: u32) -> Series {
        match n {
            0 => Series::constant(1),
            1 => self.clone(),
            _ => {
                let half = self.powi(n / 2);
                let sq = half.mul(&half);
                if n % 2 == 1 {
                    sq.mul(self)
                } else {
                    sq
                }
            }
        }
    }

    /// `F_n`: the terms with monomial `≥ n`.
    pub fn truncate_above(&self, n: &Monomial) -> Series {
        if self.is_known_zero() {
            return Series::zero();
        }
        if let Origin::Truncated(inner, bound) = self.origin() {
            if bound >= n {
                return self.clone();
            }
            return inner.truncate_above(bound).truncate_above_raw(n);
        }
        self.truncate_above_raw(n)
    }

    fn truncate_above_raw(&self, n: &Monomial) -> Series {
        Series::build(
            TakeAbove::new(self.clone(), n.clone(), false),
            self.cert().clone(),
            Origin::Truncated(self.clone(), n.clone()),
        )
    }

    /// The terms with monomial strictly above `n`.
    pub fn truncate_strictly_above(&self, n: &Monomial) -> Series {
        Series::build(
            TakeAbove::new(self.clone(), n.clone(), true),
            self.cert().clone(),
            Origin::Opaque,
        )
    }

    /// Keeps terms satisfying `keep` (which must hold on a contiguous run of
    /// the enumeration) and stops after the run, as decided by `stop`.
    pub(crate) fn filter_run(
        &self,
        keep: impl Fn(&Term) -> bool + Send + 'static,
        stop: impl Fn(&Term) -> bool + Send + 'static,
        cert: GridCertificate,
    ) -> Series {
        Series::build(Filter::new(self.clone(), keep, stop), cert, Origin::Opaque)
    }

    /// `F ∘ log`: every monomial moves up one level.
    pub fn shift_log(&self) -> Series {
        if let Some(terms) = self.known_terms() {
            return Series::from_terms(terms.into_iter().map(|t| Term {
                coeff: t.coeff,
                mono: t.mono.shift_up(),
            }));
        }
        Series::build(
            Map::new(
                self.clone(),
                |t| Term {
                    coeff: t.coeff,
                    mono: t.mono.shift_up(),
                },
                |f: &Monomial| match f.exp_exponent().signum() {
                    s if s.is_positive() => Preimage::AllBelow,
                    s if s.is_negative() => Preimage::Unbounded,
                    _ => Preimage::At(f.shift_down().expect("no exp factor")),
                },
            ),
            self.cert().map(Monomial::shift_up),
            Origin::Opaque,
        )
    }

    /// `ord(F)`: the `r` with leading monomial `exp^-r · (...)`.
    pub fn exp_order(&self, budget: &Budget) -> Result<Rational> {
        self.exp_order_with(&Meter::new(*budget))
    }

    pub(crate) fn exp_order_with(&self, m: &Meter) -> Result<Rational> {
        Ok(-self.nonzero_lead(m)?.mono.exp_exponent())
    }

    /// Small: zero, or leading monomial below 1.
    pub fn is_small(&self, budget: &Budget) -> Result<bool> {
        self.is_small_with(&Meter::new(*budget))
    }

    pub(crate) fn is_small_with(&self, m: &Meter) -> Result<bool> {
        Ok(self.lead_with(m)?.map_or(true, |t| t.mono.is_small()))
    }

    /// Leading monomial above 1 with positive coefficient.
    pub fn is_inf_increasing(&self, budget: &Budget) -> Result<bool> {
        self.is_inf_increasing_with(&Meter::new(*budget))
    }

    pub(crate) fn is_inf_increasing_with(&self, m: &Meter) -> Result<bool> {
        Ok(self
            .lead_with(m)?
            .is_some_and(|t| t.mono.is_large() && t.coeff.is_positive()))
    }

    /// Do the first `k` terms of `self` and `other` coincide?
    ///
    /// Plain prefixes are tried first. When a side cannot produce its
    /// prefix (typically because its tail cancels forever) both sides are
    /// compared on every monomial above a floor: the `k`-th term of a side
    /// that did produce `k` terms, else the lower of the last known term and
    /// the `k`-th point of the joint certificate.
    pub fn agrees_with(&self, other: &Series, k: usize, budget: &Budget) -> Result<bool> {
        Ok(self.prefix_mismatch(other, k, budget)?.is_none())
    }

    /// Like [`Series::agrees_with`], returning the two differing prefixes.
    pub fn prefix_mismatch(&self, other: &Series, k: usize, budget: &Budget) -> Result<Option<(Vec<Term>, Vec<Term>)>> {
        let quick = Budget {
            max_terms: budget.max_terms,
            max_steps: budget.max_steps.min(QUICK_STEPS_PER_TERM * k as u64 + 1_000),
        };
        let pa = self.observe(k, &quick)?;
        let pb = other.observe(k, &quick)?;
        let full = |p: &Prefix| p.budget_hit.is_none() && (p.terms.len() == k || p.exhausted);
        if full(&pa) && full(&pb) {
            return Ok((pa.terms != pb.terms).then_some((pa.terms, pb.terms)));
        }
        let kth = |p: &Prefix| (p.terms.len() == k).then(|| p.terms[k - 1].mono.clone());
        let floor = match (kth(&pa), kth(&pb)) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => {
                let joint = self.cert().union(other.cert());
                let grid = joint.walk().take(k).last();
                let known = [&pa, &pb].into_iter().filter_map(|p| p.terms.last().map(|t| t.mono.clone())).min();
                match (grid, known) {
                    (Some(g), Some(t)) => g.min(t),
                    (Some(g), None) => g,
                    (None, Some(t)) => t,
                    (None, None) => return Ok(None),
                }
            }
        };
        let m = Meter::new(*budget);
        let a = self.down_to_with(&floor, &m)?;
        let b = other.down_to_with(&floor, &m)?;
        let (a, b) = (a.into_iter().take(k).collect::<Vec<_>>(), b.into_iter().take(k).collect::<Vec<_>>());
        Ok((a != b).then_some((a, b)))
    }

    /// Checks the enumeration invariants on the first `k` terms: strictly
    /// decreasing, nonzero coefficients, inside the certificate.
    pub fn verify_prefix(&self, k: usize, budget: &Budget) -> Result<Vec<Term>> {
        let terms = self.terms_prefix(k, budget)?;
        for (i, t) in terms.iter().enumerate() {
            if t.coeff.is_zero() {
                return Err(Error::MalformedInput(format!("term {i} has a zero coefficient")));
            }
            if i > 0 && terms[i - 1].mono <= t.mono {
                return Err(Error::MalformedInput(format!(
                    "terms {} and {i} are not strictly decreasing",
                    i - 1
                )));
            }
            if !self.cert().contains(&t.mono) {
                return Err(Error::MalformedInput(format!("{} lies outside the certificate", t.mono)));
            }
        }
        Ok(terms)
    }
}

/// Text form of a prefix: `1 + x^-1 - 1/2*x^-2 + ...`.
pub fn format_terms(terms: &[Term], exhausted: bool) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let negative = t.coeff.as_rational().is_some_and(|q| q.is_negative());
        let shown = if negative {
            Term {
                coeff: t.coeff.neg(),
                mono: t.mono.clone(),
            }
        } else {
            t.clone()
        };
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&shown.to_string());
    }
    if terms.is_empty() {
        out.push('0');
    }
    if !exhausted {
        out.push_str(" + ...");
    }
    out
}

/// `Σ p_i(x) · exp^-ν_i` from rows `(ν_i, [c_0, c_1, ...])`, where `c_j` is
/// the coefficient of `x^j`. With `ilyashenko`, the first polynomial must be a
/// nonzero constant.
pub fn almost_regular(rows: &[(Rational, Vec<Rational>)], ilyashenko: bool) -> Result<Series> {
    let mut terms = Vec::new();
    for (i, (nu, poly)) in rows.iter().enumerate() {
        if nu.is_negative() {
            return Err(Error::MalformedInput(format!("exponent ν_{i} = {} is negative", format_rational(nu))));
        }
        if i > 0 && rows[i - 1].0 >= *nu {
            return Err(Error::MalformedInput(format!(
                "exponents must strictly increase: ν_{} = {} then ν_{i} = {}",
                i - 1,
                format_rational(&rows[i - 1].0),
                format_rational(nu)
            )));
        }
        for (j, c) in poly.iter().enumerate() {
            let mono = Monomial::from_pairs([(Level::EXP, -nu.clone()), (Level::X, int(j as i64))]);
            terms.push(Term::new(c.clone(), mono));
        }
    }
    if ilyashenko {
        let ok = rows
            .first()
            .is_some_and(|(_, p)| p.first().is_some_and(|c| !c.is_zero()) && p.iter().skip(1).all(Zero::is_zero));
        if !ok {
            return Err(Error::MalformedInput("p_0 must be a nonzero constant".into()));
        }
    }
    Ok(Series::from_terms(terms))
}

#[cfg(test)]
mod tests;

/// Steps per requested term before `prefix_mismatch` falls back to a floor.
const QUICK_STEPS_PER_TERM: u64 = 100;
