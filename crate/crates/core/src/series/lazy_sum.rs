//! Sums of infinitely many series, activated one stage at a time.
//!
//! Stages arrive in order. Each carries an optional a-priori bound on its
//! leading monomial; a stage without one is bounded by its actual leading
//! monomial, and every later stage must start below it. The next stage is
//! activated only once its bound reaches the largest pending head, so a term
//! is emitted only when no later stage can touch it. Activation checks that
//! given bounds never increase, that a stage respects its bound, and that it
//! starts strictly below everything already emitted; a breach is reported
//! as `SummabilityViolation`.

use crate::error::{Error, Result};
use crate::grid::GridCertificate;
use crate::monomial::Monomial;

use super::producers::{emittable, max_head, take_heads, Cursor};
use super::{Meter, Origin, Producer, Series, Step, Term};

pub struct Stage {
    pub series: Series,
    pub bound: Option<Monomial>,
}

impl Stage {
    pub fn new(series: Series, bound: Option<Monomial>) -> Stage {
        Stage { series, bound }
    }
}

/// What a [`StageSource`] has next.
pub enum Next {
    Stage(Stage),
    Done,
    /// Every remaining stage lies below the floor.
    Below,
}

/// Supplies stages. Like a producer, it must be resumable after a budget
/// error.
pub trait StageSource: Send {
    fn next_stage(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Next>;
}

struct Pending {
    series: Series,
    bound: Option<Monomial>,
    /// `Some(None)`: the stage turned out to be zero.
    lead: Option<Option<Term>>,
}

/// What is known about everything not yet activated.
enum Rest {
    Nothing,
    AtMost(Monomial),
    BelowFloor,
}

struct LazySum {
    label: String,
    source: Option<Box<dyn StageSource>>,
    pending: Option<Pending>,
    active: Vec<Cursor>,
    last_emitted: Option<Monomial>,
    last_bound: Option<Monomial>,
}

impl LazySum {
    fn violation(&self, what: String) -> Error {
        Error::SummabilityViolation(format!("{}: {what}", self.label))
    }

    fn check_lead(&self, lead: &Monomial, bound: &Option<Monomial>) -> Result<()> {
        if let Some(b) = bound {
            if lead > b {
                return Err(self.violation(format!("stage leads with {lead} above its bound {b}")));
            }
        }
        if let Some(w) = &self.last_emitted {
            if lead >= w {
                return Err(self.violation(format!("stage leads with {lead} but {w} was already emitted")));
            }
        }
        if bound.is_none() {
            if let Some(lb) = &self.last_bound {
                if lead > lb {
                    return Err(self.violation(format!("stage leads with {lead} above the previous stage {lb}")));
                }
            }
        }
        Ok(())
    }
}

impl Producer for LazySum {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        loop {
            m.tick()?;
            let mut source_below = false;
            if self.pending.is_none() {
                if let Some(src) = self.source.as_mut() {
                    match src.next_stage(floor, m)? {
                        Next::Stage(st) if st.series.is_known_zero() => continue,
                        Next::Stage(st) => {
                            if let (Some(b), Some(lb)) = (&st.bound, &self.last_bound) {
                                if b > lb {
                                    return Err(self.violation(format!("stage bound {b} exceeds previous bound {lb}")));
                                }
                            }
                            self.pending = Some(Pending {
                                series: st.series,
                                bound: st.bound,
                                lead: None,
                            })
                        }
                        Next::Done => self.source = None,
                        Next::Below => source_below = true,
                    }
                }
            }
            let (top, below) = max_head(&mut self.active, floor, m)?;
            let rest = match self.pending.as_mut() {
                None if source_below => Rest::BelowFloor,
                None => Rest::Nothing,
                Some(p) => match &p.bound {
                    Some(b) => Rest::AtMost(b.clone()),
                    None => {
                        if p.lead.is_none() {
                            match p.series.read(0, floor, m)? {
                                Step::Term(t) => p.lead = Some(Some(t)),
                                Step::Done => p.lead = Some(None),
                                Step::Below => {}
                            }
                        }
                        match &p.lead {
                            None => Rest::BelowFloor,
                            Some(None) => {
                                self.pending = None;
                                continue;
                            }
                            Some(Some(t)) => Rest::AtMost(t.mono.clone()),
                        }
                    }
                },
            };
            let must_wait = match (&rest, &top) {
                (Rest::Nothing, _) => false,
                (Rest::BelowFloor, Some(t)) => !floor.is_some_and(|f| t >= f),
                (Rest::BelowFloor, None) => true,
                (Rest::AtMost(b), Some(t)) => b >= t,
                (Rest::AtMost(_), None) => true,
            };
            if !must_wait {
                if !emittable(&top, below, floor) {
                    return Ok(if below { Step::Below } else { Step::Done });
                }
                let top = top.unwrap();
                let c = take_heads(&mut self.active, &top);
                self.last_emitted = Some(top.clone());
                if !c.is_zero() {
                    return Ok(Step::Term(Term { coeff: c, mono: top }));
                }
                continue;
            }
            // everything left might sit below the floor
            let hopeless = match &rest {
                Rest::BelowFloor => true,
                Rest::AtMost(b) => floor.is_some_and(|f| b < f),
                Rest::Nothing => false,
            };
            if hopeless && top.as_ref().map_or(true, |t| floor.is_some_and(|f| t < f)) {
                return Ok(Step::Below);
            }
            // activate the pending stage
            let p = self.pending.as_mut().unwrap();
            if p.lead.is_none() {
                match p.series.read(0, floor, m)? {
                    Step::Term(t) => p.lead = Some(Some(t)),
                    Step::Done => p.lead = Some(None),
                    Step::Below => {
                        if !top.as_ref().is_some_and(|t| floor.is_some_and(|f| t >= f)) {
                            return Ok(Step::Below);
                        }
                        // starts below the floor, hence below `top`
                        let p = self.pending.take().unwrap();
                        self.last_bound = p.bound.or_else(|| floor.cloned());
                        self.active.push(Cursor::new(p.series));
                        continue;
                    }
                }
            }
            let lead = p.lead.clone().unwrap();
            let bound = p.bound.clone();
            if let Some(lead) = &lead {
                self.check_lead(&lead.mono, &bound)?;
            }
            let p = self.pending.take().unwrap();
            self.last_bound = match (&bound, &lead) {
                (Some(b), _) => Some(b.clone()),
                (None, Some(t)) => Some(t.mono.clone()),
                (None, None) => self.last_bound.take(),
            };
            if let Some(lead) = lead {
                self.active.push(Cursor {
                    series: p.series,
                    pos: 0,
                    head: Some(Some(lead)),
                });
            }
        }
    }
}

/// A series summing the stages of `source`, certified by `cert`.
pub fn lazy_sum(label: impl Into<String>, source: impl StageSource + 'static, cert: GridCertificate) -> Series {
    Series::build(
        LazySum {
            label: label.into(),
            source: Some(Box::new(source)),
            pending: None,
            active: Vec::new(),
            last_emitted: None,
            last_bound: None,
        },
        cert,
        Origin::Opaque,
    )
}
