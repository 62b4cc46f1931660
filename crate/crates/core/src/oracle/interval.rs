use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{CapacityDistribution, Instance};
use crate::policies::UniversalSequence;
use crate::scalar::Scalar;
use crate::submodular::{ItemSet, SetFunction, MAX_ITEMS};

use super::smpsc::smpsc_expected_value;

/// Largest copy count accepted by [`interval_reduction`].
pub const INTERVAL_COPY_LIMIT: usize = MAX_ITEMS;

/// Largest copy count accepted by [`solve_interval_bruteforce`].
pub const INTERVAL_SEARCH_LIMIT: usize = 24;

/// Copy `i_j` of item `i`, occupying the time interval `[j, j + s(i) − 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CopyItem {
    pub item: usize,
    pub start: u64,
    pub end: u64,
}

impl CopyItem {
    pub fn overlaps(&self, other: &CopyItem) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Interval-independence instance over copy items with reduced function
/// `f′(U′) = Σ_t p(t)·f({i : some i_j ∈ U′ with j ≤ t − s(i)})`.
#[derive(Clone, Debug)]
pub struct IntervalInstance<S> {
    inst: Instance<S>,
    dist: CapacityDistribution<S>,
    copies: Vec<CopyItem>,
}

impl<S: Scalar> IntervalInstance<S> {
    pub fn copies(&self) -> &[CopyItem] {
        &self.copies
    }

    pub fn instance(&self) -> &Instance<S> {
        &self.inst
    }

    pub fn distribution(&self) -> &CapacityDistribution<S> {
        &self.dist
    }

    /// Copies of item `i`, by start time.
    pub fn copies_of(&self, item: usize) -> impl Iterator<Item = (usize, &CopyItem)> + '_ {
        self.copies.iter().enumerate().filter(move |(_, c)| c.item == item)
    }

    /// Earliest selected start time per item.
    fn earliest_starts(&self, selected: ItemSet) -> Vec<Option<u64>> {
        let mut first = vec![None; self.inst.n()];
        for k in selected.iter() {
            let c = &self.copies[k];
            let slot: &mut Option<u64> = &mut first[c.item];
            if slot.is_none_or(|s| c.start < s) {
                *slot = Some(c.start);
            }
        }
        first
    }

    /// Whether the selected copies are pairwise disjoint.
    pub fn is_independent(&self, selected: ItemSet) -> bool {
        let idx: Vec<usize> = selected.iter().collect();
        idx.iter()
            .enumerate()
            .all(|(a, &x)| idx[a + 1..].iter().all(|&y| !self.copies[x].overlaps(&self.copies[y])))
    }

    /// Sequence that picks each item at the smallest start among its
    /// selected copies, followed by unselected items in ascending index.
    pub fn recover_sequence(&self, selected: ItemSet) -> UniversalSequence {
        let first = self.earliest_starts(selected);
        let mut timed: Vec<(u64, usize)> = first
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (s, i)))
            .collect();
        timed.sort();
        let mut order: Vec<usize> = timed.into_iter().map(|(_, i)| i).collect();
        order.extend((0..self.inst.n()).filter(|&i| first[i].is_none()));
        UniversalSequence::new(order, self.inst.n()).expect("recovered order is a permutation")
    }
}

impl<S: Scalar> SetFunction<S> for IntervalInstance<S> {
    fn ground_size(&self) -> usize {
        self.copies.len()
    }

    fn value(&self, set: ItemSet) -> S {
        let first = self.earliest_starts(set);
        let mut total = S::zero();
        for (t, p) in self.dist.support() {
            let picked: ItemSet = first
                .iter()
                .enumerate()
                .filter(|(i, s)| s.is_some_and(|s| s + self.inst.size(*i) <= t))
                .map(|(i, _)| i)
                .collect();
            total = total + p.clone() * self.inst.value(picked);
        }
        total
    }
}

/// Builds `T − s(i) + 1` copies of each item, where `T` is the horizon of
/// `dist`.
pub fn interval_reduction<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
) -> Result<IntervalInstance<S>> {
    let horizon = dist.horizon();
    let count: u64 = (0..inst.n())
        .map(|i| (horizon + 1).saturating_sub(inst.size(i)))
        .sum();
    if count > INTERVAL_COPY_LIMIT as u64 {
        return Err(Error::capability(
            "interval reduction copies",
            count.min(usize::MAX as u64) as usize,
            INTERVAL_COPY_LIMIT,
        ));
    }
    let mut copies = Vec::with_capacity(count as usize);
    for i in 0..inst.n() {
        let s = inst.size(i);
        if s > horizon {
            continue;
        }
        for j in 0..=horizon - s {
            copies.push(CopyItem {
                item: i,
                start: j,
                end: j + s - 1,
            });
        }
    }
    Ok(IntervalInstance {
        inst: inst.clone(),
        dist: dist.clone(),
        copies,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSolution<S> {
    pub selected: ItemSet,
    pub value: S,
    pub sequence: UniversalSequence,
    /// `E_C[f(Π(C))]` of the recovered sequence.
    pub sequence_value: S,
}

/// Exact maximum of `f′` over pairwise-disjoint copy sets, with the
/// recovered sequence. Fails with [`Error::Invariant`] if the sequence
/// scores below `f′`.
pub fn solve_interval_bruteforce<S: Scalar>(iv: &IntervalInstance<S>) -> Result<IntervalSolution<S>> {
    let m = iv.copies.len();
    if m > INTERVAL_SEARCH_LIMIT {
        return Err(Error::capability("interval brute force", m, INTERVAL_SEARCH_LIMIT));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&k| (iv.copies[k].start, iv.copies[k].end, k));
    let mut sets = vec![ItemSet::EMPTY];
    // extend each independent set by copies starting after its last end
    let mut frontier: Vec<(ItemSet, usize, Option<u64>)> = vec![(ItemSet::EMPTY, 0, None)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (set, from, last_end) in frontier {
            for (pos, &k) in order.iter().enumerate().skip(from) {
                if last_end.is_none_or(|e| iv.copies[k].start > e) {
                    let grown = set.with(k);
                    sets.push(grown);
                    next.push((grown, pos + 1, Some(iv.copies[k].end)));
                }
            }
        }
        frontier = next;
    }
    let mut best = ItemSet::EMPTY;
    let mut best_value = S::zero();
    for set in sets {
        let v = iv.value(set);
        if v > best_value {
            best = set;
            best_value = v;
        }
    }
    let sequence = iv.recover_sequence(best);
    let sequence_value = smpsc_expected_value(&sequence, &iv.inst, &iv.dist);
    if !S::approx_ge(&sequence_value, &best_value) {
        return Err(Error::Invariant(format!(
            "recovered sequence scores {} below f′ = {}",
            sequence_value.render(),
            best_value.render()
        )));
    }
    Ok(IntervalSolution {
        selected: best,
        value: best_value,
        sequence,
        sequence_value,
    })
}
