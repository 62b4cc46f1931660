use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

use super::capacity::{Attempt, CapacityOracle};

/// Extra state recorded by the deterministic policy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterministicDetails {
    /// Single-valuable items `S`.
    pub single_valuable: ItemSet,
    /// `U`: empty, or the single-valuable item that fit.
    pub u: ItemSet,
    /// `s* = s(U)`.
    pub s_star: u64,
    /// `i*`, the item of `U`.
    pub i_star: Option<usize>,
    /// Whether `S` came from exact optimization (γ = 1).
    pub exact_gamma: bool,
}

/// Record of one policy execution.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTrace<S> {
    pub attempts: Vec<Attempt>,
    pub packed: ItemSet,
    pub value: S,
    /// Items in the order the greedy rule selected them (Algorithm-1 style
    /// policies only).
    pub greedy_order: Vec<usize>,
    pub deterministic: Option<DeterministicDetails>,
}

impl<S: Scalar> PolicyTrace<S> {
    pub(crate) fn new(attempts: Vec<Attempt>, packed: ItemSet, value: S) -> Self {
        PolicyTrace {
            attempts,
            packed,
            value,
            greedy_order: Vec::new(),
            deterministic: None,
        }
    }

    pub fn empty() -> Self {
        PolicyTrace::new(Vec::new(), ItemSet::EMPTY, S::zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "attempts": self.attempts,
            "packed": self.packed,
            "value": self.value.render(),
        });
        if !self.greedy_order.is_empty() {
            v["greedy_order"] = json!(self.greedy_order);
        }
        if let Some(d) = &self.deterministic {
            v["deterministic"] = json!(d);
        }
        v
    }
}

/// Binary decision tree: at each node try `item`; continue in `fit` if it
/// fits and in `misfit` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionTree {
    Stop,
    Try {
        item: usize,
        fit: Box<DecisionTree>,
        misfit: Box<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn node(item: usize, fit: DecisionTree, misfit: DecisionTree) -> Self {
        DecisionTree::Try {
            item,
            fit: Box::new(fit),
            misfit: Box::new(misfit),
        }
    }

    pub fn leaf(item: usize) -> Self {
        Self::node(item, DecisionTree::Stop, DecisionTree::Stop)
    }

    /// Every item index is `< n` and no root-to-leaf path repeats an item.
    pub fn validate(&self, n: usize) -> Result<()> {
        fn walk(t: &DecisionTree, n: usize, seen: ItemSet) -> Result<()> {
            match t {
                DecisionTree::Stop => Ok(()),
                DecisionTree::Try { item, fit, misfit } => {
                    if *item >= n {
                        return Err(Error::InvalidSubset { index: *item, n });
                    }
                    if seen.contains(*item) {
                        return Err(Error::InvalidParameter(format!(
                            "item {item} appears twice on one path"
                        )));
                    }
                    walk(fit, n, seen.with(*item))?;
                    walk(misfit, n, seen.with(*item))
                }
            }
        }
        walk(self, n, ItemSet::EMPTY)
    }

    pub fn root_item(&self) -> Option<usize> {
        match self {
            DecisionTree::Stop => None,
            DecisionTree::Try { item, .. } => Some(*item),
        }
    }
}

/// A permutation of all items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UniversalSequence(Vec<usize>);

impl UniversalSequence {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self> {
        if order.len() != n {
            return Err(Error::InvalidParameter(format!(
                "sequence has {} entries for {n} items",
                order.len()
            )));
        }
        let mut seen = ItemSet::EMPTY;
        for &i in &order {
            if i >= n {
                return Err(Error::InvalidSubset { index: i, n });
            }
            if seen.contains(i) {
                return Err(Error::InvalidParameter(format!("item {i} repeated")));
            }
            seen.insert(i);
        }
        Ok(UniversalSequence(order))
    }

    pub fn identity(n: usize) -> Self {
        UniversalSequence((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Runs a decision tree against the oracle. Without cancellation, execution
/// stops at the first item that does not fit and that item is not packed.
pub fn execute_adaptive<S: Scalar>(
    tree: &DecisionTree,
    inst: &Instance<S>,
    oracle: &mut CapacityOracle,
    cancellation: bool,
) -> Result<PolicyTrace<S>> {
    tree.validate(inst.n())?;
    let mut packed = ItemSet::EMPTY;
    let mut node = tree;
    while let DecisionTree::Try { item, fit, misfit } = node {
        if oracle.try_pack(*item, inst.size(*item)) {
            packed.insert(*item);
            node = fit;
        } else if cancellation {
            node = misfit;
        } else {
            break;
        }
    }
    Ok(PolicyTrace::new(oracle.take_log(), packed, inst.value(packed)))
}

/// Runs a fixed sequence against the oracle. Without cancellation the run
/// stops at the first misfit.
pub fn execute_universal<S: Scalar>(
    seq: &UniversalSequence,
    inst: &Instance<S>,
    oracle: &mut CapacityOracle,
    cancellation: bool,
) -> Result<PolicyTrace<S>> {
    if seq.as_slice().len() != inst.n() {
        return Err(Error::InvalidParameter(format!(
            "sequence has {} entries for {} items",
            seq.as_slice().len(),
            inst.n()
        )));
    }
    Ok(run_sequence(seq.as_slice(), inst, oracle, cancellation))
}

pub(crate) fn run_sequence<S: Scalar>(
    order: &[usize],
    inst: &Instance<S>,
    oracle: &mut CapacityOracle,
    cancellation: bool,
) -> PolicyTrace<S> {
    let mut packed = ItemSet::EMPTY;
    for &i in order {
        if oracle.try_pack(i, inst.size(i)) {
            packed.insert(i);
        } else if !cancellation {
            break;
        }
    }
    PolicyTrace::new(oracle.take_log(), packed, inst.value(packed))
}

/// Packed set of a sequence at a known capacity, without building a trace.
pub fn sequence_outcome<S: Scalar>(
    order: &[usize],
    inst: &Instance<S>,
    capacity: u64,
    cancellation: bool,
) -> ItemSet {
    let mut packed = ItemSet::EMPTY;
    let mut used = 0u64;
    for &i in order {
        let s = inst.size(i);
        if used.checked_add(s).is_some_and(|t| t <= capacity) {
            used += s;
            packed.insert(i);
        } else if !cancellation {
            break;
        }
    }
    packed
}
