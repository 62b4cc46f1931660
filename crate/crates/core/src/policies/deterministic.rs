use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::oracle::SubsetTable;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

use super::capacity::CapacityOracle;
use super::execute::{DeterministicDetails, PolicyTrace};
use super::greedy::{best_density, density_greedy};

/// How the single-valuable test estimates `f(OPT_{s(i)/2})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// Exhaustive optimum (γ = 1).
    ExactBruteforce,
    /// Density greedy compared against the best fitting singleton. Carries no
    /// approximation guarantee.
    LazyGreedyHeuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    AscendingIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PolicyConfig {
    pub cancellation: bool,
    pub gamma_mode: GammaMode,
    /// Largest `n` accepted by [`GammaMode::ExactBruteforce`].
    pub exact_bound: usize,
    pub tie_break: TieBreak,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            cancellation: true,
            gamma_mode: GammaMode::ExactBruteforce,
            exact_bound: 20,
            tie_break: TieBreak::AscendingIndex,
        }
    }
}

/// `max{f(X) : 2·s(X) ≤ budget2}` estimated by density greedy plus the best
/// singleton.
fn heuristic_half_opt<S: Scalar>(inst: &Instance<S>, budget2: u64) -> S {
    let mut x = ItemSet::EMPTY;
    let mut fx = S::zero();
    let mut used = 0u64;
    let mut remaining: ItemSet = (0..inst.n()).filter(|&i| 2 * inst.size(i) <= budget2).collect();
    let singles = remaining;
    while let Some(i) = best_density(inst, x, &fx, remaining) {
        remaining.remove(i);
        if 2 * (used + inst.size(i)) <= budget2 {
            used += inst.size(i);
            x.insert(i);
            fx = inst.value(x);
        }
    }
    singles
        .iter()
        .map(|i| inst.singleton_value(i))
        .fold(fx, S::max_of)
}

/// The set `S` of single-valuable items: `f({i}) ≥ 2·f(L_i)` where `L_i`
/// approximates `OPT_{s(i)/2}`. The half budget is compared as
/// `2·s(X) ≤ s(i)`, so odd sizes need no rounding.
pub fn single_valuable_items<S: Scalar>(inst: &Instance<S>, config: &PolicyConfig) -> Result<ItemSet> {
    let two = S::from_int(2);
    match config.gamma_mode {
        GammaMode::ExactBruteforce => {
            let table = SubsetTable::build_with_limit(inst, config.exact_bound)?;
            Ok((0..inst.n())
                .filter(|&i| {
                    let si = inst.size(i);
                    let (_, half) = table.best_where(|s| 2 * s <= si);
                    inst.singleton_value(i) >= two.clone() * half
                })
                .collect())
        }
        GammaMode::LazyGreedyHeuristic => Ok((0..inst.n())
            .filter(|&i| inst.singleton_value(i) >= two.clone() * heuristic_half_opt(inst, inst.size(i)))
            .collect()),
    }
}

/// Deterministic policy: try single-valuable items in
/// decreasing `f({i})` until one fits, then run the density greedy on the
/// remaining items with that item as the initial set.
pub fn deterministic_policy<S: Scalar>(
    inst: &Instance<S>,
    oracle: &mut CapacityOracle,
    config: &PolicyConfig,
) -> Result<PolicyTrace<S>> {
    if !config.cancellation {
        return Err(Error::Precondition(
            "the deterministic policy requires cancellation".into(),
        ));
    }
    if inst.n() == 0 {
        return Ok(PolicyTrace::empty());
    }
    let single = single_valuable_items(inst, config)?;
    let mut remaining = inst.all_items();
    let mut u = ItemSet::EMPTY;
    while u.is_empty() && !single.intersection(remaining).is_empty() {
        let mut pick: Option<usize> = None;
        for i in single.intersection(remaining).iter() {
            if pick.is_none_or(|p| inst.singleton_value(i) > inst.singleton_value(p)) {
                pick = Some(i);
            }
        }
        let i = pick.expect("nonempty candidate set");
        if oracle.try_pack(i, inst.size(i)) {
            u = ItemSet::singleton(i);
        }
        remaining.remove(i);
    }
    let (packed, order) = density_greedy(inst, u, remaining.union(u), oracle);
    let mut trace = PolicyTrace::new(oracle.take_log(), packed, inst.value(packed));
    trace.greedy_order = order;
    trace.deterministic = Some(DeterministicDetails {
        single_valuable: single,
        u,
        s_star: inst.set_size(u),
        i_star: u.iter().next(),
        exact_gamma: config.gamma_mode == GammaMode::ExactBruteforce,
    });
    Ok(trace)
}
