use crate::error::{Error, Result};
use crate::instances::{CapacityDistribution, Instance};
use crate::policies::UniversalSequence;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

/// Largest item count for permutation enumeration.
pub const SEQUENCE_SEARCH_LIMIT: usize = 8;

/// Prefix sets of `order` and their sizes: entry `k` holds the first `k`
/// items.
fn prefixes<S: Scalar>(order: &[usize], inst: &Instance<S>) -> (Vec<u64>, Vec<ItemSet>) {
    let mut sizes = Vec::with_capacity(order.len() + 1);
    let mut sets = Vec::with_capacity(order.len() + 1);
    let mut size = 0u64;
    let mut set = ItemSet::EMPTY;
    sizes.push(0);
    sets.push(set);
    for &i in order {
        size = size.saturating_add(inst.size(i));
        set.insert(i);
        sizes.push(size);
        sets.push(set);
    }
    (sizes, sets)
}

/// `E_C[f(Π(C))] = Σ_t p(t)·f(Π(t))` without cancellation: `Π(t)` is the
/// longest prefix of the sequence whose total size is at most `t`.
pub fn smpsc_expected_value<S: Scalar>(
    seq: &UniversalSequence,
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
) -> S {
    order_expected_value(seq.as_slice(), inst, dist, &mut Vec::new())
}

fn order_expected_value<S: Scalar>(
    order: &[usize],
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    cache: &mut Vec<Option<S>>,
) -> S {
    let (sizes, sets) = prefixes(order, inst);
    cache.clear();
    cache.resize(sizes.len(), None);
    let mut total = S::zero();
    for (t, p) in dist.support() {
        let k = sizes.partition_point(|&s| s <= t) - 1;
        let v = cache[k].get_or_insert_with(|| inst.value(sets[k]));
        total = total + p.clone() * v.clone();
    }
    total
}

/// Exact best sequence over all `n!` orders; the lexicographically first
/// order wins ties.
pub fn smpsc_optimal_sequence<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
) -> Result<(UniversalSequence, S)> {
    let n = inst.n();
    if n > SEQUENCE_SEARCH_LIMIT {
        return Err(Error::capability("sequence enumeration", n, SEQUENCE_SEARCH_LIMIT));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut cache = Vec::new();
    let mut best_order = order.clone();
    let mut best = order_expected_value(&order, inst, dist, &mut cache);
    while next_permutation(&mut order) {
        let v = order_expected_value(&order, inst, dist, &mut cache);
        if v > best {
            best = v;
            best_order.clone_from(&order);
        }
    }
    Ok((UniversalSequence::new(best_order, n)?, best))
}

/// Advances to the next permutation in lexicographic order; false after the
/// last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{make_fixture, FixtureId};
    use crate::Rational;

    fn kpuc() -> (Instance<Rational>, CapacityDistribution<Rational>) {
        let inst = make_fixture::<Rational>(FixtureId::KpucEightNinths).unwrap();
        let dist = inst.distribution().unwrap().clone();
        (inst, dist)
    }

    #[test]
    fn kpuc_sequences() {
        let (inst, dist) = kpuc();
        let cab = UniversalSequence::new(vec![2, 0, 1], 3).unwrap();
        assert_eq!(smpsc_expected_value(&cab, &inst, &dist), Rational::from_int(4));
        let abc = UniversalSequence::identity(3);
        assert_eq!(smpsc_expected_value(&abc, &inst, &dist), Rational::from_ratio(33, 9));
        // (b, a, c) packs {b} at C = 4 and {a, b} at C = 5
        let (best, v) = smpsc_optimal_sequence(&inst, &dist).unwrap();
        assert_eq!(v, Rational::from_ratio(37, 9));
        assert_eq!(best.as_slice(), &[1, 0, 2]);
    }

    #[test]
    fn permutations_in_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn gap_integer_optimum_is_one() {
        let inst = make_fixture::<Rational>(FixtureId::IntegralityGap { t: 5 }).unwrap();
        let dist = inst.distribution().unwrap().clone();
        let (_, v) = smpsc_optimal_sequence(&inst, &dist).unwrap();
        assert_eq!(v, Rational::from_int(1));
    }
}
