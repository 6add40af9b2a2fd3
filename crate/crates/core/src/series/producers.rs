//! The basic producers. Each reads its inputs through memoized
//! [`Series::read`] calls and only mutates its own state after every read it
//! needs has succeeded.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::monomial::Monomial;
use crate::scalar::Scalar;

use super::{Meter, Producer, Series, Step, Term};

/// Position in an input series with a cached head.
pub(crate) struct Cursor {
    pub series: Series,
    pub pos: usize,
    /// `None`: not read yet (or last read was below the floor).
    /// `Some(None)`: input exhausted.
    pub head: Option<Option<Term>>,
}

pub(crate) enum Peek<'a> {
    Term(&'a Term),
    Done,
    Below,
}

impl Cursor {
    pub fn new(series: Series) -> Cursor {
        Cursor {
            series,
            pos: 0,
            head: None,
        }
    }

    /// Loads the head; returns `true` if a term or exhaustion is now known.
    pub fn load(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<bool> {
        if self.head.is_none() {
            match self.series.read(self.pos, floor, m)? {
                Step::Term(t) => self.head = Some(Some(t)),
                Step::Done => self.head = Some(None),
                Step::Below => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn peek(&self) -> Peek<'_> {
        match &self.head {
            None => Peek::Below,
            Some(None) => Peek::Done,
            Some(Some(t)) => Peek::Term(t),
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self.head, Some(None))
    }

    pub fn advance(&mut self) {
        self.pos += 1;
        self.head = None;
    }
}

/// Loads every cursor and drops exhausted ones. Returns the largest head and
/// whether some cursor only reported that its next term is below `floor`.
pub(crate) fn max_head(
    cursors: &mut Vec<Cursor>,
    floor: Option<&Monomial>,
    m: &Meter,
) -> Result<(Option<Monomial>, bool)> {
    let mut below = false;
    for c in cursors.iter_mut() {
        if !c.load(floor, m)? {
            below = true;
        }
    }
    cursors.retain(|c| !c.is_exhausted());
    let top = cursors
        .iter()
        .filter_map(|c| match c.peek() {
            Peek::Term(t) => Some(&t.mono),
            _ => None,
        })
        .max()
        .cloned();
    Ok((top, below))
}

/// May `top` be emitted given cursors that are only known to be below `floor`?
pub(crate) fn emittable(top: &Option<Monomial>, below: bool, floor: Option<&Monomial>) -> bool {
    match top {
        None => false,
        Some(t) => !below || floor.is_some_and(|f| t >= f),
    }
}

/// Sums and consumes the heads equal to `mono`.
pub(crate) fn take_heads(cursors: &mut [Cursor], mono: &Monomial) -> Scalar {
    let mut acc = Scalar::zero();
    for c in cursors.iter_mut() {
        if let Peek::Term(t) = c.peek() {
            if &t.mono == mono {
                acc = acc.add(&t.coeff);
                c.advance();
            }
        }
    }
    acc
}

/// n-way ordered merge with coefficient addition.
pub struct Merge {
    cursors: Vec<Cursor>,
}

impl Merge {
    pub fn new(inputs: Vec<Series>) -> Merge {
        Merge {
            cursors: inputs.into_iter().map(Cursor::new).collect(),
        }
    }
}

impl Producer for Merge {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        loop {
            let (top, below) = max_head(&mut self.cursors, floor, m)?;
            if !emittable(&top, below, floor) {
                return Ok(if below { Step::Below } else { Step::Done });
            }
            let top = top.unwrap();
            let c = take_heads(&mut self.cursors, &top);
            if !c.is_zero() {
                return Ok(Step::Term(Term { coeff: c, mono: top }));
            }
            m.tick()?;
        }
    }
}

/// Where a floor on the output lands on the input of a monotone map.
pub enum Preimage {
    /// Every output is below the floor.
    AllBelow,
    /// Every output is above the floor.
    Unbounded,
    At(Monomial),
}

/// Term-wise map that preserves order and nonzero coefficients.
pub struct Map<F, P> {
    input: Series,
    pos: usize,
    f: F,
    pre: P,
}

impl<F, P> Map<F, P>
where
    F: Fn(Term) -> Term + Send,
    P: Fn(&Monomial) -> Preimage + Send,
{
    pub fn new(input: Series, f: F, pre: P) -> Map<F, P> {
        Map { input, pos: 0, f, pre }
    }
}

impl<F, P> Producer for Map<F, P>
where
    F: Fn(Term) -> Term + Send,
    P: Fn(&Monomial) -> Preimage + Send,
{
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        let inner = match floor.map(&self.pre) {
            None | Some(Preimage::Unbounded) => None,
            Some(Preimage::AllBelow) => return Ok(Step::Below),
            Some(Preimage::At(f)) => Some(f),
        };
        match self.input.read(self.pos, inner.as_ref(), m)? {
            Step::Term(t) => {
                self.pos += 1;
                Ok(Step::Term((self.f)(t)))
            }
            other => Ok(other),
        }
    }
}

/// The terms `≥ bound` (or `> bound` when `strict`).
pub struct TakeAbove {
    input: Series,
    pos: usize,
    bound: Monomial,
    strict: bool,
    stopped: bool,
}

impl TakeAbove {
    pub fn new(input: Series, bound: Monomial, strict: bool) -> TakeAbove {
        TakeAbove {
            input,
            pos: 0,
            bound,
            strict,
            stopped: false,
        }
    }
}

impl Producer for TakeAbove {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        if self.stopped {
            return Ok(Step::Done);
        }
        let own = floor.map_or(true, |f| *f <= self.bound);
        let eff = if own { &self.bound } else { floor.unwrap() };
        match self.input.read(self.pos, Some(eff), m)? {
            Step::Term(t) if t.mono > self.bound || (!self.strict && t.mono == self.bound) => {
                self.pos += 1;
                Ok(Step::Term(t))
            }
            Step::Below if !own => Ok(Step::Below),
            _ => {
                self.stopped = true;
                Ok(Step::Done)
            }
        }
    }
}

/// Skips terms until `keep`, emits while `keep`, ends at the first `stop`.
pub struct Filter<K, S> {
    input: Series,
    pos: usize,
    keep: K,
    stop: S,
    stopped: bool,
}

impl<K, S> Filter<K, S> {
    pub fn new(input: Series, keep: K, stop: S) -> Filter<K, S> {
        Filter {
            input,
            pos: 0,
            keep,
            stop,
            stopped: false,
        }
    }
}

impl<K: Fn(&Term) -> bool + Send, S: Fn(&Term) -> bool + Send> Producer for Filter<K, S> {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        while !self.stopped {
            let t = match self.input.read(self.pos, floor, m)? {
                Step::Term(t) => t,
                Step::Below => return Ok(Step::Below),
                Step::Done => break,
            };
            if (self.stop)(&t) {
                self.stopped = true;
                break;
            }
            self.pos += 1;
            if (self.keep)(&t) {
                return Ok(Step::Term(t));
            }
            m.tick()?;
        }
        self.stopped = true;
        Ok(Step::Done)
    }
}

/// A heap entry. Loaded cells hold the exact product `a_i · b_j`; unloaded
/// ones only a strict upper bound on it.
#[derive(PartialEq, Eq)]
struct Cell {
    key: Monomial,
    loaded: Option<Scalar>,
    i: usize,
    j: usize,
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.loaded.is_some().cmp(&other.loaded.is_some()))
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cauchy product by best-first search over index pairs `(i, j)`.
///
/// Popping `(i, j)` queues `(i, j+1)`, and `(i+1, 0)` when `j = 0`, so
/// every pair is queued once, after a pair with a larger product. A queued
/// pair is read lazily, keyed by its parent's product until then. Equal
/// products are merged at pop time.
pub struct Product {
    a: Series,
    b: Series,
    heap: BinaryHeap<Cell>,
    started: bool,
    acc: Option<(Monomial, Scalar)>,
}

impl Product {
    pub fn new(a: Series, b: Series) -> Product {
        Product {
            a,
            b,
            heap: BinaryHeap::new(),
            started: false,
            acc: None,
        }
    }

    /// Reads the factors of `(i, j)` with a floor on their product.
    fn load(&self, i: usize, j: usize, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        let (anchor, other, k) = if j == 0 {
            (self.b.read(0, None, m)?, &self.a, i)
        } else {
            (self.a.read(i, None, m)?, &self.b, j)
        };
        let Step::Term(anchor) = anchor else {
            unreachable!("anchor term was read before")
        };
        let f = floor.map(|f| f.div(&anchor.mono));
        Ok(match other.read(k, f.as_ref(), m)? {
            Step::Term(t) => Step::Term(Term {
                coeff: t.coeff.mul(&anchor.coeff),
                mono: t.mono.mul(&anchor.mono),
            }),
            s => s,
        })
    }
}

impl Producer for Product {
    fn next(&mut self, floor: Option<&Monomial>, m: &Meter) -> Result<Step> {
        if !self.started {
            // the largest base bounds a whole series from above
            let fa = floor.zip(self.b.cert().max_base()).map(|(f, top)| f.div(&top));
            let x = match self.a.read(0, fa.as_ref(), m)? {
                Step::Term(x) => Some(x),
                Step::Done => None,
                Step::Below => return Ok(Step::Below),
            };
            if let Some(x) = x {
                let fb = floor.map(|f| f.div(&x.mono));
                match self.b.read(0, fb.as_ref(), m)? {
                    Step::Term(y) => self.heap.push(Cell {
                        key: x.mono.mul(&y.mono),
                        loaded: Some(x.coeff.mul(&y.coeff)),
                        i: 0,
                        j: 0,
                    }),
                    Step::Done => {}
                    Step::Below => return Ok(Step::Below),
                }
            }
            self.started = true;
        }
        loop {
            m.tick()?;
            let (key, loaded, i, j) = match self.heap.peek() {
                Some(c) => (c.key.clone(), c.loaded.is_some(), c.i, c.j),
                None => match self.acc.take() {
                    Some((mono, coeff)) if !coeff.is_zero() => return Ok(Step::Term(Term { coeff, mono })),
                    Some(_) => continue,
                    None => return Ok(Step::Done),
                },
            };
            if let Some((mono, _)) = &self.acc {
                // an unloaded cell keyed at `mono` is strictly below it
                if !(loaded && key == *mono) && (key <= *mono) {
                    let (mono, coeff) = self.acc.take().unwrap();
                    if !coeff.is_zero() {
                        return Ok(Step::Term(Term { coeff, mono }));
                    }
                    continue;
                }
            } else if let Some(f) = floor {
                if key < *f || (!loaded && key == *f) {
                    return Ok(Step::Below);
                }
            }
            if !loaded {
                // the floor that matters: the pending accumulator, else the caller's
                let want = match (&self.acc, floor) {
                    (Some((mono, _)), _) => Some(mono.clone()),
                    (None, f) => f.cloned(),
                };
                let step = self.load(i, j, want.as_ref(), m)?;
                let cell = self.heap.pop().unwrap();
                match step {
                    Step::Term(t) => self.heap.push(Cell {
                        key: t.mono,
                        loaded: Some(t.coeff),
                        i,
                        j,
                    }),
                    Step::Done => {}
                    Step::Below => self.heap.push(Cell {
                        key: want.expect("floor was set"),
                        loaded: None,
                        ..cell
                    }),
                }
                continue;
            }
            let cell = self.heap.pop().unwrap();
            let coeff = cell.loaded.unwrap();
            match &mut self.acc {
                Some((_, acc)) => *acc = acc.add(&coeff),
                None => self.acc = Some((cell.key.clone(), coeff)),
            }
            self.heap.push(Cell {
                key: cell.key.clone(),
                loaded: None,
                i,
                j: j + 1,
            });
            if j == 0 {
                self.heap.push(Cell {
                    key: cell.key,
                    loaded: None,
                    i: i + 1,
                    j: 0,
                });
            }
        }
    }
}
