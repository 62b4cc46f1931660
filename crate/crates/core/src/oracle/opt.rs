use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

/// Largest item count for `2^n` enumeration.
pub const OPT_LIMIT: usize = 22;

/// Size and value of every subset of an instance.
#[derive(Clone, Debug)]
pub struct SubsetTable<S> {
    n: usize,
    sizes: Vec<u64>,
    values: Vec<S>,
}

impl<S: Scalar> SubsetTable<S> {
    pub fn build(inst: &Instance<S>) -> Result<Self> {
        Self::build_with_limit(inst, OPT_LIMIT)
    }

    pub fn build_with_limit(inst: &Instance<S>, limit: usize) -> Result<Self> {
        let n = inst.n();
        if n > limit.min(OPT_LIMIT) {
            return Err(Error::capability("exhaustive subset enumeration", n, limit.min(OPT_LIMIT)));
        }
        let count = 1usize << n;
        let mut sizes = vec![0u64; count];
        for m in 1..count {
            let low = m.trailing_zeros() as usize;
            sizes[m] = sizes[m & (m - 1)] + inst.size(low);
        }
        let values = (0..count as u64).map(|m| inst.value(ItemSet(m))).collect();
        Ok(SubsetTable { n, sizes, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, set: ItemSet) -> &S {
        &self.values[set.bits() as usize]
    }

    pub fn size(&self, set: ItemSet) -> u64 {
        self.sizes[set.bits() as usize]
    }

    /// Best subset among those whose size satisfies `admissible`; ties go to
    /// the smallest bitmask.
    pub fn best_where(&self, admissible: impl Fn(u64) -> bool) -> (ItemSet, S) {
        let mut best = 0usize;
        for m in 1..self.values.len() {
            if admissible(self.sizes[m]) && self.values[m] > self.values[best] {
                best = m;
            }
        }
        (ItemSet(best as u64), self.values[best].clone())
    }
}

/// `OPT_C` with its value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult<S> {
    pub set: ItemSet,
    pub value: S,
}

/// Answers `OPT_C` queries for every capacity after one enumeration.
#[derive(Clone, Debug)]
pub struct OptOracle<S> {
    /// Distinct achievable sizes, ascending, with the best set of size at most that.
    frontier: Vec<(u64, ItemSet, S)>,
    singletons: Vec<(u64, S)>,
}

impl<S: Scalar> OptOracle<S> {
    pub fn new(inst: &Instance<S>) -> Result<Self> {
        let table = SubsetTable::build(inst)?;
        Ok(Self::from_table(inst, &table))
    }

    pub fn from_table(inst: &Instance<S>, table: &SubsetTable<S>) -> Self {
        let mut order: Vec<usize> = (0..table.values.len()).collect();
        // by size, then value descending, then mask ascending
        order.sort_by(|&a, &b| {
            table.sizes[a]
                .cmp(&table.sizes[b])
                .then_with(|| {
                    table.values[b]
                        .partial_cmp(&table.values[a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .then(a.cmp(&b))
        });
        let mut frontier: Vec<(u64, ItemSet, S)> = Vec::new();
        for m in order {
            let size = table.sizes[m];
            let value = &table.values[m];
            let set = ItemSet(m as u64);
            match frontier.last_mut() {
                Some((s, best_set, best)) => {
                    let better = *value > *best || (*value == *best && set < *best_set);
                    if *s == size {
                        if better {
                            *best_set = set;
                            *best = value.clone();
                        }
                    } else {
                        let (prev_set, prev) = (*best_set, best.clone());
                        if better {
                            frontier.push((size, set, value.clone()));
                        } else {
                            frontier.push((size, prev_set, prev));
                        }
                    }
                }
                None => frontier.push((size, set, value.clone())),
            }
        }
        let singletons = (0..inst.n())
            .map(|i| (inst.size(i), inst.singleton_value(i)))
            .collect();
        OptOracle { frontier, singletons }
    }

    /// `OPT_C`: best set with `s(X) ≤ C`, smallest bitmask among ties.
    pub fn opt(&self, capacity: u64) -> OptResult<S> {
        let idx = self.frontier.partition_point(|(s, _, _)| *s <= capacity);
        // the empty set has size 0, so idx ≥ 1
        let (_, set, value) = &self.frontier[idx - 1];
        OptResult {
            set: *set,
            value: value.clone(),
        }
    }

    pub fn opt_value(&self, capacity: u64) -> S {
        self.opt(capacity).value
    }

    /// `I_C = {i : s(i) ≤ C}`.
    pub fn items_fitting(&self, capacity: u64) -> ItemSet {
        self.singletons
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| *s <= capacity)
            .map(|(i, _)| i)
            .collect()
    }

    /// `i^C ∈ argmax{f({i}) : i ∈ I_C}`, smallest index among ties.
    pub fn best_singleton(&self, capacity: u64) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, (s, v)) in self.singletons.iter().enumerate() {
            if *s <= capacity && best.is_none_or(|b| *v > self.singletons[b].1) {
                best = Some(i);
            }
        }
        best
    }
}

/// One-shot `OPT_C`.
pub fn opt_for_capacity<S: Scalar>(inst: &Instance<S>, capacity: u64) -> Result<OptResult<S>> {
    let table = SubsetTable::build(inst)?;
    let (set, value) = table.best_where(|s| s <= capacity);
    Ok(OptResult { set, value })
}
