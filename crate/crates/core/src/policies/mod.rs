//! Adaptive and universal packing policies executed against a fit/no-fit
//! capacity oracle.
//!
//! All argmax steps break ties toward the smaller item index.

mod capacity;
mod deterministic;
mod execute;
mod greedy;
mod search;
mod universal;

pub use capacity::{Attempt, CapacityOracle};
pub use deterministic::{deterministic_policy, single_valuable_items, GammaMode, PolicyConfig, TieBreak};
pub use execute::{
    execute_adaptive, execute_universal, sequence_outcome, DecisionTree, DeterministicDetails, PolicyTrace,
    UniversalSequence,
};
pub use greedy::{
    greedy_policy, randomized_adaptive_draw, randomized_adaptive_expectation, value_greedy_policy, Coin,
    RandomizedOutcome,
};
pub use search::{
    best_by_first_item, exhaustive_policy_search, mixture_worst_case, policy_frontier, score, PolicyOutcome,
    PolicySearchResult, SearchObjective, POLICY_SEARCH_LIMIT,
};
pub use universal::{doubling_rounds, universal_draw, universal_expectation, universal_policy_sequences, UniversalPair};
