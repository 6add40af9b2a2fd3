//! Log-composition: `log ∘ G`, `exp ∘ F`, substitution into log-free series,
//! `F ∘ log ∘ G` and the formal Taylor expansion.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero, ToPrimitive};

use crate::calculus::nth_derivative;
use crate::error::{Error, Result};
use crate::field::{compose_ps1_with, power_with, split_leading, PowerSeries1};
use crate::grid::GridCertificate;
use crate::monomial::{Level, Monomial};
use crate::scalar::{factorial, Rational, Scalar};
use crate::series::{lazy_sum, Budget, Meter, Next, Series, Stage, StageSource, Term};

/// `c + Σ c_i log_i` with `i ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLinearPart {
    pub constant: Scalar,
    pub coeffs: BTreeMap<Level, Rational>,
}

impl LogLinearPart {
    pub fn to_series(&self) -> Series {
        let mut terms: Vec<Term> = self
            .coeffs
            .iter()
            .map(|(l, c)| Term::new(c.clone(), Monomial::factor(*l, Rational::one())))
            .collect();
        terms.push(Term {
            coeff: self.constant.clone(),
            mono: Monomial::one(),
        });
        Series::from_terms(terms)
    }

    /// `exp` of the non-constant part: `c_i log_i` becomes `log_{i-1}^{c_i}`.
    pub fn exp_monomial(&self) -> Monomial {
        Monomial::from_pairs(
            self.coeffs
                .iter()
                .map(|(l, c)| (l.down().expect("log-linear levels are at least 0"), c.clone())),
        )
    }
}

fn require_inf_increasing(g: &Series, op: &str, m: &Meter) -> Result<()> {
    if g.is_inf_increasing_with(m)? {
        return Ok(());
    }
    let lead = g.lead_with(m)?.map_or_else(|| "0".to_string(), |t| t.to_string());
    Err(Error::NotInfIncreasing(format!("leading term {lead}")).in_op(op))
}

/// `log ∘ G = log a + log ∘ g + F_log ∘ ε` for `G = a·g·(1 + ε)`.
pub fn log_of(g: &Series, budget: &Budget) -> Result<Series> {
    log_of_with(g, &Meter::new(*budget))
}

pub(crate) fn log_of_with(g: &Series, m: &Meter) -> Result<Series> {
    let (lead, eps) = split_leading(g, m).map_err(|e| match e {
        Error::DivisionByZero => Error::ZeroSeries.in_op("log"),
        e => e.in_op("log"),
    })?;
    if !lead.coeff.is_positive() {
        return Err(Error::NonPositiveLeading(lead.coeff.to_string()).in_op("log"));
    }
    let mut head: Vec<Term> = lead
        .mono
        .exps()
        .iter()
        .map(|(l, r)| Term::new(r.clone(), Monomial::factor(l.up(), Rational::one())))
        .collect();
    head.push(Term {
        coeff: lead.coeff.ln().map_err(|e| e.in_op("log"))?,
        mono: Monomial::one(),
    });
    let head = Series::from_terms(head);
    if eps.is_known_zero() {
        return Ok(head);
    }
    Ok(head.add(&compose_ps1_with(&PowerSeries1::log(), &eps, m)?))
}

/// `log_i ∘ G`; `log_0 ∘ G = G`.
pub fn log_iter(g: &Series, i: usize, budget: &Budget) -> Result<Series> {
    log_iter_with(g, i, &Meter::new(*budget))
}

pub(crate) fn log_iter_with(g: &Series, i: usize, m: &Meter) -> Result<Series> {
    if i == 0 {
        return Ok(g.clone());
    }
    require_inf_increasing(g, "log_iter", m)?;
    (0..i).try_fold(g.clone(), |acc, _| log_of_with(&acc, m))
}

/// Splits `F` into its log-linear large part with constant, and the small
/// rest.
pub fn split_log_linear(f: &Series, budget: &Budget) -> Result<(LogLinearPart, Series)> {
    split_log_linear_with(f, &Meter::new(*budget))
}

fn split_log_linear_with(f: &Series, m: &Meter) -> Result<(LogLinearPart, Series)> {
    let mut part = LogLinearPart {
        constant: Scalar::zero(),
        coeffs: BTreeMap::new(),
    };
    let mut head = Vec::new();
    for i in 0.. {
        let Some(t) = f.term_at(i, m)? else { break };
        if t.mono.is_small() {
            break;
        }
        if t.mono.is_one() {
            part.constant = t.coeff.clone();
        } else {
            let level = t.mono.as_log_level().ok_or_else(|| Error::LargePartNotLogLinear(t.to_string()))?;
            let c = t.coeff.as_rational().ok_or_else(|| Error::LargePartNotLogLinear(t.to_string()))?;
            part.coeffs.insert(level, c.clone());
        }
        head.push(t);
    }
    let rest = if head.is_empty() { f.clone() } else { f.sub(&Series::from_terms(head)) };
    Ok((part, rest))
}

/// `exp ∘ F` for `F` with a log-linear large part.
pub fn exp_of(f: &Series, budget: &Budget) -> Result<Series> {
    exp_of_with(f, &Meter::new(*budget))
}

pub(crate) fn exp_of_with(f: &Series, m: &Meter) -> Result<Series> {
    let (part, small) = split_log_linear_with(f, m).map_err(|e| e.in_op("exp"))?;
    let scale = Term {
        coeff: part.constant.exp().map_err(|e| e.in_op("exp"))?,
        mono: part.exp_monomial(),
    };
    if small.is_known_zero() {
        return Ok(Series::from_terms([scale]));
    }
    Ok(compose_ps1_with(&PowerSeries1::exp(Rational::one()), &small, m)?.mul_term(&scale))
}

/// `G^s` through `exp^s ∘ log ∘ G = a^s g^s · F_{exp^s} ∘ (F_log ∘ ε)`;
/// `Gⁿ` by multiplication for natural `n`.
pub fn exp_power_via_log(g: &Series, s: &Rational, budget: &Budget) -> Result<Series> {
    exp_power_via_log_with(g, s, &Meter::new(*budget))
}

fn exp_power_via_log_with(g: &Series, s: &Rational, m: &Meter) -> Result<Series> {
    if s.is_zero() {
        return Ok(Series::constant(1));
    }
    if let Some(n) = s.is_integer().then(|| s.to_integer().to_u32()).flatten() {
        // F_exp^n ∘ F_log is a polynomial whose tail cancels only in the limit
        return Ok(g.powi(n));
    }
    let (lead, eps) = split_leading(g, m)?;
    let scale = Term {
        coeff: lead.coeff.pow(s).map_err(|e| e.in_op("exp^s ∘ log"))?,
        mono: lead.mono.pow(s),
    };
    if eps.is_known_zero() {
        return Ok(Series::from_terms([scale]));
    }
    let inner = compose_ps1_with(&PowerSeries1::log(), &eps, m)?;
    Ok(compose_ps1_with(&PowerSeries1::exp(s.clone()), &inner, m)?.mul_term(&scale))
}

struct TowerLevel {
    q: Series,
    lead: Term,
    eps_cert: GridCertificate,
}

/// `Q_i = log_i ∘ G` for `i = 0..=top`, with cached rational powers.
///
/// `m ↦ Π lead(Q_i)^{r_i}` is an order-preserving homomorphism on log-free
/// monomials; it gives the leading monomial of `m ∘ G`.
struct LogTower {
    levels: Vec<TowerLevel>,
    powers: Mutex<HashMap<(usize, Rational), Series>>,
}

impl LogTower {
    fn new(g: &Series, top: usize, m: &Meter) -> Result<LogTower> {
        let mut levels = Vec::new();
        let mut q = g.clone();
        for i in 0..=top {
            if i > 0 {
                q = log_of_with(&q, m)?;
            }
            let (lead, eps) = split_leading(&q, m)?;
            levels.push(TowerLevel {
                q: q.clone(),
                lead,
                eps_cert: eps.cert().clone(),
            });
        }
        Ok(LogTower {
            levels,
            powers: Mutex::new(HashMap::new()),
        })
    }

    fn index(l: Level) -> Result<usize> {
        usize::try_from(l.get()).map_err(|_| Error::HasExpPart(format!("level {l}")))
    }

    fn image(&self, mono: &Monomial) -> Result<Monomial> {
        let mut out = Monomial::one();
        for (l, r) in mono.exps() {
            out = out.mul(&self.levels[Self::index(*l)?].lead.mono.pow(r));
        }
        Ok(out)
    }

    /// Certificate of `F ∘ G` from that of a log-free `F`.
    fn image_cert(&self, cert: &GridCertificate) -> Result<GridCertificate> {
        let bases = cert.bases().iter().map(|b| self.image(b)).collect::<Result<Vec<_>>>()?;
        let mut gens = cert.generators().iter().map(|g| self.image(g)).collect::<Result<Vec<_>>>()?;
        for level in &self.levels {
            gens.extend(level.eps_cert.geometric().generators().iter().cloned());
        }
        Ok(GridCertificate::new(bases, gens))
    }

    fn power(&self, i: usize, r: &Rational, m: &Meter) -> Result<Series> {
        let key = (i, r.clone());
        if let Some(s) = self.powers.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(s.clone());
        }
        let s = power_with(&self.levels[i].q, r, m)?;
        self.powers.lock().unwrap_or_else(|e| e.into_inner()).insert(key, s.clone());
        Ok(s)
    }

    /// `a · m ∘ G`.
    fn substitute_term(&self, t: &Term, m: &Meter) -> Result<Series> {
        let mut out = Series::constant(t.coeff.clone());
        for (l, r) in t.mono.exps() {
            out = out.mul(&self.power(Self::index(*l)?, r, m)?);
        }
        Ok(out)
    }
}

fn top_level(cert: &GridCertificate) -> usize {
    cert.levels().into_iter().map(|l| l.get().max(0) as usize).max().unwrap_or(0)
}

struct SubstStages {
    f: Series,
    pos: usize,
    tower: Arc<LogTower>,
}

impl StageSource for SubstStages {
    fn next_stage(&mut self, _floor: Option<&Monomial>, m: &Meter) -> Result<Next> {
        let Some(t) = self.f.term_at(self.pos, m)? else {
            return Ok(Next::Done);
        };
        let bound = self.tower.image(&t.mono)?;
        let stage = self.tower.substitute_term(&t, m)?;
        self.pos += 1;
        Ok(Next::Stage(Stage::new(stage, Some(bound))))
    }
}

/// `F ∘ G` for log-free `F`, one monomial at a time:
/// `Π log_i^{r_i} ∘ G = Π (log_i ∘ G)^{r_i}`.
pub fn substitute_logfree(f: &Series, g: &Series, budget: &Budget) -> Result<Series> {
    substitute_logfree_with(f, g, &Meter::new(*budget))
}

pub(crate) fn substitute_logfree_with(f: &Series, g: &Series, m: &Meter) -> Result<Series> {
    let op = "substitute";
    require_inf_increasing(g, op, m)?;
    if f.is_known_zero() {
        return Ok(Series::zero());
    }
    let cert = f.cert().grade_part(&Rational::zero());
    let tower = Arc::new(LogTower::new(g, top_level(&cert), m).map_err(|e| e.in_op(op))?);
    if let Some(terms) = f.known_terms() {
        let parts = terms
            .iter()
            .map(|t| tower.substitute_term(t, m))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_op(op))?;
        return Ok(Series::sum(parts));
    }
    let out_cert = tower.image_cert(&cert).map_err(|e| e.in_op(op))?;
    Ok(lazy_sum(
        "substitution",
        SubstStages {
            f: f.clone(),
            pos: 0,
            tower,
        },
        out_cert,
    ))
}

/// The grade-`r` summand of `F ∘ log ∘ G`: `(f_r ∘ log ∘ G) · G^-r`.
pub fn compose_summand(f: &Series, g: &Series, r: &Rational, budget: &Budget) -> Result<Series> {
    let m = Meter::new(*budget);
    require_inf_increasing(g, "compose", &m)?;
    summand_with(f, g, r, &m)
}

fn summand_with(f: &Series, g: &Series, r: &Rational, m: &Meter) -> Result<Series> {
    let fr = f.e_coefficient(r);
    if fr.is_known_zero() {
        return Ok(Series::zero());
    }
    let inner = substitute_logfree_with(&fr.shift_log(), g, m)?;
    Ok(inner.mul(&exp_power_via_log_with(g, &-r.clone(), m)?))
}

struct GradeStages {
    f: Series,
    g: Series,
    grades: Box<dyn Iterator<Item = Rational> + Send>,
    tower: Arc<LogTower>,
}

impl StageSource for GradeStages {
    fn next_stage(&mut self, _floor: Option<&Monomial>, m: &Meter) -> Result<Next> {
        loop {
            m.tick()?;
            let Some(r) = self.grades.next() else {
                return Ok(Next::Done);
            };
            let Some(top) = self.f.cert().grade_part(&r).max_base() else {
                continue;
            };
            let bound = self.tower.image(&top.shift_up())?;
            let stage = summand_with(&self.f, &self.g, &r, m)?;
            return Ok(Next::Stage(Stage::new(stage, Some(bound))));
        }
    }
}

/// `F ∘ log ∘ G = Σ_r (f_r ∘ log ∘ G) · G^-r` over the E-grading of `F`.
pub fn compose_with_log(f: &Series, g: &Series, budget: &Budget) -> Result<Series> {
    compose_with_log_with(f, g, &Meter::new(*budget))
}

pub(crate) fn compose_with_log_with(f: &Series, g: &Series, m: &Meter) -> Result<Series> {
    let op = "compose";
    require_inf_increasing(g, op, m)?;
    if f.is_known_zero() {
        return Ok(Series::zero());
    }
    let shifted = f.cert().map(Monomial::shift_up);
    let tower = Arc::new(LogTower::new(g, top_level(&shifted), m).map_err(|e| e.in_op(op))?);
    let wrap = |e: Error| e.in_op(op);
    if let Some(grades) = f.e_grades() {
        let parts = grades
            .iter()
            .map(|r| summand_with(f, g, r, m))
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        return Ok(Series::sum(parts));
    }
    let cert = tower.image_cert(&shifted).map_err(wrap)?;
    let grades = f.cert().grade_walk();
    Ok(lazy_sum(
        "composition",
        GradeStages {
            f: f.clone(),
            g: g.clone(),
            grades: Box::new(grades),
            tower,
        },
        cert,
    ))
}

/// The pieces `F ∘ (G + H)` is assembled from: `g₀ = exp ∘ G` and `H`.
struct TaylorShape {
    g0: Series,
}

fn taylor_shape(g: &Series, h: &Series, m: &Meter) -> Result<TaylorShape> {
    let op = "taylor";
    if !h.is_small_with(m)? {
        let lead = h.lead_with(m)?.expect("nonzero");
        return Err(Error::NotSmall(lead.mono.to_string()).in_op(op));
    }
    let unsupported = |why: String| Error::ShapeNotSupported(why).in_op(op);
    if !g.cert().is_log_free() {
        return Err(unsupported("G has an exponential part".into()));
    }
    let g0 = exp_of_with(g, m).map_err(|e| match e.root() {
        Error::LargePartNotLogLinear(t) => unsupported(format!("G is not a logarithm: large term {t}")),
        _ => e,
    })?;
    if !g0.cert().is_log_free() {
        return Err(unsupported("exp ∘ G has an exponential part".into()));
    }
    if !g0.is_inf_increasing_with(m)? {
        return Err(unsupported("exp ∘ G is not infinitely increasing".into()));
    }
    Ok(TaylorShape { g0 })
}

fn taylor_stage(f: &Series, shape: &TaylorShape, h: &Series, i: usize, m: &Meter) -> Result<Series> {
    let d = nth_derivative(f, i);
    if d.is_known_zero() {
        return Ok(Series::zero());
    }
    let c = compose_with_log_with(&d, &shape.g0, m)?;
    if i == 0 {
        return Ok(c);
    }
    Ok(c.mul(&h.powi(i as u32)).scalar_mul_rational(&factorial(i as u64).recip()))
}

struct TaylorStages {
    f: Series,
    h: Series,
    shape: TaylorShape,
    i: usize,
}

impl StageSource for TaylorStages {
    fn next_stage(&mut self, _floor: Option<&Monomial>, m: &Meter) -> Result<Next> {
        if self.i > 0 && self.h.is_known_zero() {
            return Ok(Next::Done);
        }
        let d = nth_derivative(&self.f, self.i);
        if d.is_known_zero() {
            return Ok(Next::Done);
        }
        let stage = taylor_stage(&self.f, &self.shape, &self.h, self.i, m)?;
        self.i += 1;
        Ok(Next::Stage(Stage::new(stage, None)))
    }
}

/// Certificate covering every derivative of `F`: derivative multipliers
/// below 1 join the generators.
fn derivatives_cert(f: &Series) -> GridCertificate {
    let top = top_level(f.cert()) as u32;
    let multipliers = (0..=top).map(|l| Monomial::log_derivative_factor(Level::log(l)));
    f.cert().with_generators(multipliers)
}

/// `F ∘ (G + H) = Σ_i F⁽ⁱ⁾ ∘ G · Hⁱ / i!` for `G = log ∘ g₀` with log-free,
/// infinitely increasing `g₀`, and small `H`.
pub fn taylor_compose(f: &Series, g: &Series, h: &Series, budget: &Budget) -> Result<Series> {
    let m = Meter::new(*budget);
    let shape = taylor_shape(g, h, &m)?;
    let dcert = derivatives_cert(f).map(Monomial::shift_up);
    let tower = LogTower::new(&shape.g0, top_level(&dcert), &m).map_err(|e| e.in_op("taylor"))?;
    let mut cert = tower.image_cert(&dcert).map_err(|e| e.in_op("taylor"))?;
    if !h.is_known_zero() {
        cert = cert.product(&h.cert().geometric());
    }
    Ok(lazy_sum(
        "taylor",
        TaylorStages {
            f: f.clone(),
            h: h.clone(),
            shape,
            i: 0,
        },
        cert,
    ))
}

/// Stages `0..=n` of [`taylor_compose`].
pub fn taylor_partial(f: &Series, g: &Series, h: &Series, n: usize, budget: &Budget) -> Result<Series> {
    let m = Meter::new(*budget);
    let shape = taylor_shape(g, h, &m)?;
    let parts = (0..=n)
        .map(|i| taylor_stage(f, &shape, h, i, &m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Series::sum(parts))
}
