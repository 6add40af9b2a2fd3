//! Grid certificates: a finite description `B · ⟨G⟩` of a set of monomials
//! containing the support of a series, where `B` is a finite set of bases and
//! `⟨G⟩` the monoid generated by finitely many strictly small monomials.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_traits::{Signed, ToPrimitive, Zero};

use crate::monomial::{Level, Monomial};
use crate::scalar::{int, Rational};

/// Products with more bases than this are [compacted](GridCertificate::compacted).
const COMPACT_ABOVE: usize = 48;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridCertificate {
    bases: BTreeSet<Monomial>,
    generators: BTreeSet<Monomial>,
}

impl GridCertificate {
    /// The empty set (certificate of the zero series).
    pub fn empty() -> GridCertificate {
        GridCertificate::default()
    }

    /// Certificate of a finite support.
    pub fn finite(monos: impl IntoIterator<Item = Monomial>) -> GridCertificate {
        GridCertificate {
            bases: monos.into_iter().collect(),
            generators: BTreeSet::new(),
        }
    }

    /// Panics if a generator is not strictly small.
    pub fn new(bases: impl IntoIterator<Item = Monomial>, generators: impl IntoIterator<Item = Monomial>) -> GridCertificate {
        let generators: BTreeSet<Monomial> = generators.into_iter().collect();
        assert!(
            generators.iter().all(Monomial::is_small),
            "grid generators must be strictly small"
        );
        GridCertificate {
            bases: bases.into_iter().collect(),
            generators,
        }
    }

    pub fn bases(&self) -> &BTreeSet<Monomial> {
        &self.bases
    }

    pub fn generators(&self) -> &BTreeSet<Monomial> {
        &self.generators
    }

    /// The largest certified monomial (generators are small).
    pub fn max_base(&self) -> Option<Monomial> {
        self.bases.iter().next_back().cloned()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn union(&self, other: &GridCertificate) -> GridCertificate {
        GridCertificate {
            bases: self.bases.union(&other.bases).cloned().collect(),
            generators: self.generators.union(&other.generators).cloned().collect(),
        }
    }

    /// Certificate of a product: pairwise base products, generator union.
    pub fn product(&self, other: &GridCertificate) -> GridCertificate {
        let mut bases = BTreeSet::new();
        for a in &self.bases {
            for b in &other.bases {
                bases.insert(a.mul(b));
            }
        }
        let cert = GridCertificate {
            bases,
            generators: self.generators.union(&other.generators).cloned().collect(),
        };
        if cert.bases.len() > COMPACT_ABOVE {
            cert.compacted()
        } else {
            cert
        }
    }

    /// A coarser certificate with the single base `max`: every other base `b`
    /// becomes the generator `b / max`.
    pub fn compacted(&self) -> GridCertificate {
        let Some(top) = self.max_base() else {
            return self.clone();
        };
        let mut generators = self.generators.clone();
        generators.extend(self.bases.iter().filter(|b| **b != top).map(|b| b.div(&top)));
        GridCertificate {
            bases: BTreeSet::from([top]),
            generators,
        }
    }

    pub fn scale(&self, m: &Monomial) -> GridCertificate {
        GridCertificate {
            bases: self.bases.iter().map(|b| b.mul(m)).collect(),
            generators: self.generators.clone(),
        }
    }

    /// Image under an order-preserving monoid map (level shifts).
    pub fn map(&self, f: impl Fn(&Monomial) -> Monomial) -> GridCertificate {
        GridCertificate {
            bases: self.bases.iter().map(&f).collect(),
            generators: self.generators.iter().map(&f).collect(),
        }
    }

    /// Adds generators; non-small ones are rejected with a panic.
    pub fn with_generators(&self, gens: impl IntoIterator<Item = Monomial>) -> GridCertificate {
        let mut out = self.clone();
        for g in gens {
            assert!(g.is_small(), "grid generators must be strictly small");
            out.generators.insert(g);
        }
        out
    }

    /// All levels mentioned by bases or generators.
    pub fn levels(&self) -> BTreeSet<Level> {
        self.bases
            .iter()
            .chain(self.generators.iter())
            .flat_map(|m| m.levels().collect::<Vec<_>>())
            .collect()
    }

    /// True when no base or generator has an `exp` factor.
    pub fn is_log_free(&self) -> bool {
        !self.levels().contains(&Level::EXP)
    }

    /// The finitely many E-grades `r` (exponent `-r` at level `-1`) when no
    /// generator carries an `exp` factor.
    pub fn exp_grades(&self) -> Option<BTreeSet<Rational>> {
        if self.generators.iter().any(|g| !g.exp_exponent().is_zero()) {
            return None;
        }
        Some(self.bases.iter().map(|b| -b.exp_exponent()).collect())
    }

    /// Can E-grade `r` occur in the certified set?
    pub fn admits_exp_grade(&self, r: &Rational) -> bool {
        let target = -r.clone();
        let weights: Vec<Rational> = self
            .generators
            .iter()
            .map(|g| g.exp_exponent())
            .filter(|e| !e.is_zero())
            .collect();
        self.bases
            .iter()
            .any(|b| reachable(&(target.clone() - b.exp_exponent()), &weights))
    }

    /// Decides membership `m ∈ B · ⟨G⟩` exactly.
    pub fn contains(&self, m: &Monomial) -> bool {
        let gens: Vec<&Monomial> = self.generators.iter().collect();
        self.bases.iter().any(|b| in_monoid(&m.div(b), &gens))
    }

    /// An equivalent certificate for the small part: every base is strictly
    /// small and `B' · ⟨G⟩ ⊇ (B · ⟨G⟩) ∩ {m < 1}`.
    pub fn small_part(&self) -> GridCertificate {
        let gens: Vec<Monomial> = self.generators.iter().cloned().collect();
        let mut bases = BTreeSet::new();
        for b in &self.bases {
            small_cover(b, &gens, &mut bases);
        }
        GridCertificate {
            bases,
            generators: self.generators.clone(),
        }
    }

    /// Certificate for `Σ_{n≥0} εⁿ` given the certificate of a small `ε`:
    /// base `1`, generated by the small bases of `ε` and its generators.
    pub fn geometric(&self) -> GridCertificate {
        let small = self.small_part();
        let mut generators = small.generators;
        generators.extend(small.bases);
        GridCertificate {
            bases: BTreeSet::from([Monomial::one()]),
            generators,
        }
    }

    /// Drops bases already covered by another base's lattice.
    pub fn pruned(&self) -> GridCertificate {
        let gens: Vec<&Monomial> = self.generators.iter().collect();
        let all: Vec<&Monomial> = self.bases.iter().collect();
        let mut keep = BTreeSet::new();
        for (i, b) in all.iter().enumerate() {
            let covered = all.iter().enumerate().any(|(j, c)| {
                j != i && in_monoid(&b.div(c), &gens) && !(j > i && in_monoid(&c.div(b), &gens))
            });
            if !covered {
                keep.insert((*b).clone());
            }
        }
        GridCertificate {
            bases: keep,
            generators: self.generators.clone(),
        }
    }
}

impl GridCertificate {
    /// Certificate of the certified monomials of E-grade `r` (exponent `-r`
    /// at level `-1`). Its generators carry no `exp` factor.
    pub fn grade_part(&self, r: &Rational) -> GridCertificate {
        let (exp_gens, flat): (Vec<&Monomial>, Vec<&Monomial>) =
            self.generators.iter().partition(|g| !g.exp_exponent().is_zero());
        let weights: Vec<Rational> = exp_gens.iter().map(|g| -g.exp_exponent()).collect();
        let mut bases = BTreeSet::new();
        for b in &self.bases {
            let total = b.exp_exponent() + r;
            for combo in exact_combinations(&total, &weights) {
                let m = combo
                    .iter()
                    .zip(&exp_gens)
                    .fold(b.clone(), |acc, (n, g)| acc.mul(&g.powi(*n)));
                bases.insert(m);
            }
        }
        GridCertificate {
            bases,
            generators: flat.into_iter().cloned().collect(),
        }
    }

    /// The E-grades that may occur, in increasing order.
    pub fn grade_walk(&self) -> GradeWalk {
        let mut steps: Vec<Rational> = self
            .generators
            .iter()
            .map(|g| -g.exp_exponent())
            .filter(|w| !w.is_zero())
            .collect();
        steps.sort();
        steps.dedup();
        GradeWalk {
            heap: self
                .bases
                .iter()
                .map(|b| (Reverse(-b.exp_exponent()), 0))
                .collect(),
            steps,
            last: None,
        }
    }
}

/// See [`GridCertificate::grade_walk`].
pub struct GradeWalk {
    steps: Vec<Rational>,
    heap: BinaryHeap<(Reverse<Rational>, usize)>,
    last: Option<Rational>,
}

impl Iterator for GradeWalk {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        while let Some((Reverse(r), from)) = self.heap.pop() {
            for (j, w) in self.steps.iter().enumerate().skip(from) {
                self.heap.push((Reverse(&r + w), j));
            }
            if self.last.as_ref() != Some(&r) {
                self.last = Some(r.clone());
                return Some(r);
            }
        }
        None
    }
}

/// Distinct certified monomials, largest first.
pub struct GridWalk {
    gens: Vec<Monomial>,
    heap: BinaryHeap<(Monomial, usize)>,
    last: Option<Monomial>,
}

impl GridCertificate {
    /// Walks `B · ⟨G⟩` in decreasing order. Every lattice point is reached
    /// along one path only: a point may only be extended by generators at or
    /// after the last one used.
    pub fn walk(&self) -> GridWalk {
        GridWalk {
            gens: self.generators.iter().cloned().collect(),
            heap: self.bases.iter().map(|b| (b.clone(), 0)).collect(),
            last: None,
        }
    }
}

impl Iterator for GridWalk {
    type Item = Monomial;

    fn next(&mut self) -> Option<Monomial> {
        while let Some((m, from)) = self.heap.pop() {
            for (j, g) in self.gens.iter().enumerate().skip(from) {
                self.heap.push((m.mul(g), j));
            }
            if self.last.as_ref() != Some(&m) {
                self.last = Some(m.clone());
                return Some(m);
            }
        }
        None
    }
}

/// Is `target` a non-negative integer combination of the (nonzero) weights?
/// All weights are negative (exp parts of small generators).
fn reachable(target: &Rational, weights: &[Rational]) -> bool {
    if target.is_zero() {
        return true;
    }
    if target.is_positive() {
        return false;
    }
    let Some((w, rest)) = weights.split_first() else {
        return false;
    };
    debug_assert!(w.is_negative());
    let max = (target / w).floor().to_integer().to_i64().unwrap_or(0).min(10_000);
    (0..=max).any(|n| reachable(&(target - w * int(n)), rest))
}

/// Lowest level at which any of the monomials is nonzero.
fn lowest_level<'a>(monos: impl IntoIterator<Item = &'a Monomial>) -> Option<Level> {
    monos.into_iter().filter_map(Monomial::min_level).min()
}

/// Non-negative integer vectors `n` over `weights` (all positive) with
/// `Σ nᵢ wᵢ = total`.
fn exact_combinations(total: &Rational, weights: &[Rational]) -> Vec<Vec<i64>> {
    fn go(total: &Rational, weights: &[Rational], acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        match weights.split_first() {
            None => {
                if total.is_zero() {
                    out.push(acc.clone());
                }
            }
            Some((w, rest)) => {
                let max = (total / w).floor().to_integer().to_i64().unwrap_or(0).clamp(0, 10_000);
                for n in 0..=max {
                    acc.push(n);
                    go(&(total - w * int(n)), rest, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    if total.is_negative() {
        return out;
    }
    go(total, weights, &mut Vec::new(), &mut out);
    out
}

/// Vectors `n` with `Σ nᵢ wᵢ ≤ total` (weights positive).
fn bounded_combinations(total: &Rational, weights: &[Rational]) -> Vec<Vec<i64>> {
    fn go(total: &Rational, weights: &[Rational], acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        match weights.split_first() {
            None => out.push(acc.clone()),
            Some((w, rest)) => {
                let max = (total / w).floor().to_integer().to_i64().unwrap_or(0).clamp(0, 10_000);
                for n in 0..=max {
                    acc.push(n);
                    go(&(total - w * int(n)), rest, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    if total.is_negative() {
        return out;
    }
    go(total, weights, &mut Vec::new(), &mut out);
    out
}

fn apply(base: &Monomial, gens: &[&Monomial], n: &[i64]) -> Monomial {
    gens.iter()
        .zip(n)
        .fold(base.clone(), |acc, (g, k)| if *k == 0 { acc } else { acc.mul(&g.powi(*k)) })
}

/// Membership of `target` in the monoid generated by small `gens`.
fn in_monoid(target: &Monomial, gens: &[&Monomial]) -> bool {
    if target.is_one() {
        return true;
    }
    let Some(level) = lowest_level(gens.iter().copied()) else {
        return false;
    };
    if target.min_level().is_some_and(|l| l < level) {
        return false;
    }
    let (active, rest): (Vec<&Monomial>, Vec<&Monomial>) =
        gens.iter().partition(|g| !g.exponent(level).is_zero());
    let want = -target.exponent(level);
    let weights: Vec<Rational> = active.iter().map(|g| -g.exponent(level)).collect();
    exact_combinations(&want, &weights).into_iter().any(|n| {
        let used = apply(&Monomial::one(), &active, &n);
        in_monoid(&target.div(&used), &rest)
    })
}

/// Adds to `out` small monomials `b·gⁿ` such that every small element of
/// `b·⟨gens⟩` is a multiple (in the lattice) of one of them.
fn small_cover(b: &Monomial, gens: &[Monomial], out: &mut BTreeSet<Monomial>) {
    if b.is_small() {
        out.insert(b.clone());
        return;
    }
    let refs: Vec<&Monomial> = gens.iter().collect();
    let Some(level) = lowest_level(std::iter::once(b).chain(refs.iter().copied())) else {
        return; // b = 1 and no generators
    };
    let c = b.exponent(level);
    if c.is_negative() {
        out.insert(b.clone());
        return;
    }
    let (active, rest): (Vec<Monomial>, Vec<Monomial>) =
        gens.iter().cloned().partition(|g| !g.exponent(level).is_zero());
    if active.is_empty() {
        if c.is_zero() {
            // b is trivial at this level; look higher without generators at it
            let above = b.clone();
            let higher: Vec<Monomial> = rest;
            small_cover_above(&above, &higher, level, out);
        }
        return;
    }
    let weights: Vec<Rational> = active.iter().map(|g| -g.exponent(level)).collect();
    let active_refs: Vec<&Monomial> = active.iter().collect();
    for v in bounded_combinations(&c, &weights) {
        let sum: Rational = v.iter().zip(&weights).map(|(n, w)| w * int(*n)).sum();
        for k in 0..active.len() {
            if &sum + &weights[k] > c {
                let mut w = v.clone();
                w[k] += 1;
                out.insert(apply(b, &active_refs, &w));
            }
        }
        if sum == c {
            let next = apply(b, &active_refs, &v);
            small_cover_above(&next, &rest, level, out);
        }
    }
}

/// `small_cover` for a base whose exponents at levels `≤ level` are all zero
/// and generators that vanish at those levels too.
fn small_cover_above(b: &Monomial, gens: &[Monomial], level: Level, out: &mut BTreeSet<Monomial>) {
    debug_assert!(b.levels().all(|l| l > level) || b.is_one() || b.min_level().is_some_and(|l| l > level));
    small_cover(b, gens, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn m(pairs: &[(i32, i64, i64)]) -> Monomial {
        Monomial::from_pairs(pairs.iter().map(|(l, n, d)| (Level::new(*l).unwrap(), rat(*n, *d))))
    }

    #[test]
    fn membership() {
        let cert = GridCertificate::new([m(&[(0, 1, 1)])], [m(&[(0, -1, 1)]), m(&[(1, -1, 1)])]);
        assert!(cert.contains(&m(&[(0, 1, 1)])));
        assert!(cert.contains(&m(&[(0, -2, 1), (1, -5, 1)])));
        assert!(!cert.contains(&m(&[(0, -2, 1), (1, 1, 1)])));
        assert!(!cert.contains(&m(&[(0, 2, 1)])));
        assert!(!cert.contains(&m(&[(0, -1, 2)])));
    }

    #[test]
    fn grades() {
        // bases 1 and exp^-1 x, generators exp^-1/2 x^3 and x^-1
        let cert = GridCertificate::new(
            [m(&[]), m(&[(-1, -1, 1), (0, 1, 1)])],
            [m(&[(-1, -1, 2), (0, 3, 1)]), m(&[(0, -1, 1)])],
        );
        let g: Vec<Rational> = cert.grade_walk().take(4).collect();
        assert_eq!(g, vec![rat(0, 1), rat(1, 2), rat(1, 1), rat(3, 2)]);
        let part = cert.grade_part(&rat(1, 1));
        assert_eq!(part.generators().len(), 1);
        assert_eq!(
            part.bases().iter().cloned().collect::<Vec<_>>(),
            vec![m(&[(-1, -1, 1), (0, 1, 1)]), m(&[(-1, -1, 1), (0, 6, 1)])]
        );
        assert!(cert.grade_part(&rat(1, 3)).is_empty());
    }

    #[test]
    fn walk_is_decreasing_and_distinct() {
        let cert = GridCertificate::new([m(&[]), m(&[(0, -1, 2)])], [m(&[(0, -1, 1)]), m(&[(0, -1, 2)]), m(&[(1, -1, 1)])]);
        let seen: Vec<Monomial> = cert.walk().take(40).collect();
        assert!(seen.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(seen[..3], [m(&[]), m(&[(1, -1, 1)]), m(&[(1, -2, 1)])]);
        assert!(seen.iter().all(|x| cert.contains(x)));
        assert_eq!(GridCertificate::finite([m(&[(0, 1, 1)]), m(&[])]).walk().count(), 2);
    }

    #[test]
    fn small_part_covers_small_lattice_points() {
        // b = x · log⁻³ with generators x^-1/2 and log⁻¹
        let b = m(&[(0, 1, 1), (1, -3, 1)]);
        let g1 = m(&[(0, -1, 2)]);
        let g2 = m(&[(1, -1, 1)]);
        let cert = GridCertificate::new([b.clone()], [g1.clone(), g2.clone()]);
        let small = cert.small_part();
        assert!(small.bases().iter().all(Monomial::is_small));
        for i in 0..6 {
            for j in 0..6 {
                let p = b.mul(&g1.powi(i)).mul(&g2.powi(j));
                if p.is_small() {
                    assert!(small.contains(&p), "{p} not covered");
                }
            }
        }
    }

    #[test]
    fn small_part_with_trivial_low_levels() {
        // b = log with generators x^0 log... : log^1 needs x⁻¹ or log⁻²
        let b = m(&[(1, 1, 1)]);
        let gens = [m(&[(0, -1, 1), (1, 3, 1)]), m(&[(1, -1, 1)])];
        let cert = GridCertificate::new([b.clone()], gens.clone());
        let small = cert.small_part();
        for i in 0..5 {
            for j in 0..5 {
                let p = b.mul(&gens[0].powi(i)).mul(&gens[1].powi(j));
                assert_eq!(p.is_small(), small.contains(&p), "{p}");
            }
        }
    }

    #[test]
    fn exp_grade_reachability() {
        let cert = GridCertificate::new([Monomial::one()], [m(&[(-1, -1, 2)]), m(&[(0, -1, 1)])]);
        assert!(cert.admits_exp_grade(&rat(3, 2)));
        assert!(!cert.admits_exp_grade(&rat(1, 3)));
        assert!(cert.exp_grades().is_none());
        let finite = GridCertificate::finite([m(&[(-1, -2, 1)]), m(&[(0, 1, 1)])]);
        assert_eq!(finite.exp_grades().unwrap().len(), 2);
    }
}
