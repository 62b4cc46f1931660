//! Brute-force ground truth: optimal sets per capacity, robustness profiles,
//! optimal sequences for a capacity distribution, and the interval
//! reduction with an exhaustive independent-set solver.

mod hardness;
mod interval;
mod opt;
mod robustness;
mod smpsc;

pub use hardness::{
    deterministic_and_half_mixture, geometric_sweep, randomized_game_value, GeometricSweep, GEOMETRIC_SWEEP_LIMIT,
};
pub use interval::{
    interval_reduction, solve_interval_bruteforce, CopyItem, IntervalInstance, IntervalSolution,
    INTERVAL_COPY_LIMIT, INTERVAL_SEARCH_LIMIT,
};
pub use opt::{opt_for_capacity, OptOracle, OptResult, SubsetTable, OPT_LIMIT};
pub use robustness::{
    default_capacities, deterministic_floor, policy_value, randomized_adaptive_floor, ratio_against,
    robustness_profile, universal_floor, PolicyId, RatioReport, RatioRow,
};
pub use smpsc::{smpsc_expected_value, smpsc_optimal_sequence, SEQUENCE_SEARCH_LIMIT};
