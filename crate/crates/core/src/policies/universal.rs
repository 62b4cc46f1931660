use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instances::Instance;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

use super::capacity::CapacityOracle;
use super::execute::{sequence_outcome, UniversalSequence};
use super::greedy::density_greedy;

/// The two sequences of the randomized universal policy.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalPair {
    /// Doubling emulation of the density greedy.
    pub doubling: UniversalSequence,
    /// Decreasing singleton value.
    pub by_value: UniversalSequence,
}

/// Smallest `k ≥ 0` with `s_min · 2^k ≥ T`, i.e. `⌈log₂(T / s_min)⌉`.
pub fn doubling_rounds(total: u64, s_min: u64) -> u32 {
    let mut k = 0u32;
    while (s_min as u128) << k < total as u128 {
        k += 1;
    }
    k
}

/// Builds `Π¹` and `Π²`. Construction is offline: the doubling branch runs
/// the density greedy against simulated capacities `2^k · s_min`. The seed
/// is unused (the coin is enumerated by [`universal_expectation`]).
pub fn universal_policy_sequences<S: Scalar>(inst: &Instance<S>, _seed: u64) -> Result<UniversalPair> {
    let n = inst.n();
    let all = inst.all_items();
    let mut doubling = Vec::with_capacity(n);
    let mut placed = ItemSet::EMPTY;
    if let Some(s_min) = inst.min_size() {
        for k in 0..=doubling_rounds(inst.total_size(), s_min) {
            let capacity = s_min.saturating_mul(1u64 << k.min(63));
            let mut sim = CapacityOracle::new(capacity);
            let (packed, order) = density_greedy(inst, ItemSet::EMPTY, all, &mut sim);
            for i in order {
                if packed.contains(i) && !placed.contains(i) {
                    placed.insert(i);
                    doubling.push(i);
                }
            }
        }
    }
    doubling.extend(all.difference(placed).iter());
    let mut by_value: Vec<usize> = (0..n).collect();
    let singles: Vec<S> = (0..n).map(|i| inst.singleton_value(i)).collect();
    by_value.sort_by(|&a, &b| {
        singles[b]
            .partial_cmp(&singles[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(UniversalPair {
        doubling: UniversalSequence::new(doubling, n)?,
        by_value: UniversalSequence::new(by_value, n)?,
    })
}

/// Exact expectation `(f(Π¹(C)) + f(Π²(C))) / 2`.
pub fn universal_expectation<S: Scalar>(
    inst: &Instance<S>,
    pair: &UniversalPair,
    capacity: u64,
    cancellation: bool,
) -> S {
    let a = inst.value(sequence_outcome(pair.doubling.as_slice(), inst, capacity, cancellation));
    let b = inst.value(sequence_outcome(pair.by_value.as_slice(), inst, capacity, cancellation));
    (a + b) / S::from_int(2)
}

/// One seeded coin flip choosing between the two sequences.
pub fn universal_draw(pair: &UniversalPair, seed: u64) -> &UniversalSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.random_bool(0.5) {
        &pair.doubling
    } else {
        &pair.by_value
    }
}
