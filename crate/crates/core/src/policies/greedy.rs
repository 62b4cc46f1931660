use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

use super::capacity::CapacityOracle;
use super::execute::PolicyTrace;

/// `argmax (f(X+i) − f(X)) / s(i)` over `candidates`, comparing densities by
/// cross-multiplication; the smallest index wins ties.
pub(crate) fn best_density<S: Scalar>(inst: &Instance<S>, x: ItemSet, fx: &S, candidates: ItemSet) -> Option<usize> {
    let mut best: Option<(usize, S, S)> = None;
    for i in candidates.iter() {
        let gain = inst.value(x.with(i)) - fx.clone();
        let size = S::from_u64_exact(inst.size(i));
        let better = match &best {
            None => true,
            Some((_, g, s)) => gain.clone() * s.clone() > g.clone() * size.clone(),
        };
        if better {
            best = Some((i, gain, size));
        }
    }
    best.map(|(i, _, _)| i)
}

/// `argmax f(X+i) − f(X)` over `candidates`; the smallest index wins ties.
pub(crate) fn best_gain<S: Scalar>(inst: &Instance<S>, x: ItemSet, fx: &S, candidates: ItemSet) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for i in candidates.iter() {
        let gain = inst.value(x.with(i)) - fx.clone();
        if best.as_ref().is_none_or(|(_, g)| gain > *g) {
            best = Some((i, gain));
        }
    }
    best.map(|(i, _)| i)
}

/// Core of the density greedy: starting from the packed set `x0`, repeatedly
/// pick the best-density remaining candidate and try it.
pub(crate) fn density_greedy<S: Scalar>(
    inst: &Instance<S>,
    x0: ItemSet,
    candidates: ItemSet,
    oracle: &mut CapacityOracle,
) -> (ItemSet, Vec<usize>) {
    let mut x = x0;
    let mut fx = inst.value(x);
    let mut remaining = candidates.difference(x0);
    let mut order = Vec::with_capacity(remaining.len());
    while let Some(i) = best_density(inst, x, &fx, remaining) {
        remaining.remove(i);
        order.push(i);
        if oracle.try_pack(i, inst.size(i)) {
            x.insert(i);
            fx = inst.value(x);
        }
    }
    (x, order)
}

/// Density greedy starting from an already packed set `U`.
///
/// The oracle must already account for `U`, i.e. report
/// `packed_size() == s(U)`. The greedy order over `I ∖ U` is recorded.
pub fn greedy_policy<S: Scalar>(
    inst: &Instance<S>,
    u: ItemSet,
    oracle: &mut CapacityOracle,
) -> Result<PolicyTrace<S>> {
    let all = inst.all_items();
    if !u.is_subset_of(all) {
        return Err(Error::InvalidSubset {
            index: u.span() - 1,
            n: inst.n(),
        });
    }
    if oracle.packed_size() != inst.set_size(u) {
        return Err(Error::Precondition(format!(
            "oracle holds size {} but s(U) = {}",
            oracle.packed_size(),
            inst.set_size(u)
        )));
    }
    let (packed, order) = density_greedy(inst, u, all, oracle);
    let mut trace = PolicyTrace::new(oracle.take_log(), packed, inst.value(packed));
    trace.greedy_order = order;
    Ok(trace)
}

/// Value greedy with cancellation (the second branch of the randomized greedy policy).
pub fn value_greedy_policy<S: Scalar>(inst: &Instance<S>, oracle: &mut CapacityOracle) -> Result<PolicyTrace<S>> {
    let mut x = ItemSet::EMPTY;
    let mut fx = S::zero();
    let mut remaining = inst.all_items();
    let mut order = Vec::with_capacity(inst.n());
    while let Some(i) = best_gain(inst, x, &fx, remaining) {
        remaining.remove(i);
        order.push(i);
        if oracle.try_pack(i, inst.size(i)) {
            x.insert(i);
            fx = inst.value(x);
        }
    }
    let mut trace = PolicyTrace::new(oracle.take_log(), x, fx);
    trace.greedy_order = order;
    Ok(trace)
}

/// Both branches of the randomized adaptive policy at one capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedOutcome<S> {
    pub density_branch: PolicyTrace<S>,
    pub value_branch: PolicyTrace<S>,
    /// `(f(P¹(C)) + f(P²(C))) / 2`.
    pub expectation: S,
}

/// Exact expectation of the randomized greedy policy at capacity `C`; the coin is enumerated.
pub fn randomized_adaptive_expectation<S: Scalar>(inst: &Instance<S>, capacity: u64) -> Result<RandomizedOutcome<S>> {
    let density_branch = greedy_policy(inst, ItemSet::EMPTY, &mut CapacityOracle::new(capacity))?;
    let value_branch = value_greedy_policy(inst, &mut CapacityOracle::new(capacity))?;
    let expectation = (density_branch.value.clone() + value_branch.value.clone()) / S::from_int(2);
    Ok(RandomizedOutcome {
        density_branch,
        value_branch,
        expectation,
    })
}

/// Which branch a single draw took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    Head,
    Tail,
}

/// One seeded draw of the randomized greedy policy against a hidden capacity.
pub fn randomized_adaptive_draw<S: Scalar>(
    inst: &Instance<S>,
    oracle: &mut CapacityOracle,
    seed: u64,
) -> Result<(Coin, PolicyTrace<S>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.random_bool(0.5) {
        Ok((Coin::Head, greedy_policy(inst, ItemSet::EMPTY, oracle)?))
    } else {
        Ok((Coin::Tail, value_greedy_policy(inst, oracle)?))
    }
}
