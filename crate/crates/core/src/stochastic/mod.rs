//! Stochastic-capacity pipeline: time-indexed and compact relaxations,
//! continuous greedy over an embedded LP oracle, contention-resolution
//! rounding, and the end-to-end sequence algorithm.

mod breakpoints;
mod conversion;
mod extension;
mod greedy;
mod lp;
mod pipeline;
mod relaxation;
mod rounding;

pub use breakpoints::{
    build_compact_relaxation, compact_polytope, full_mass_at_least, modular_compact_weights,
    BreakpointStructure, CompactObjective, CompactSolution,
};
pub use conversion::{
    check_compaction, check_conversion, compaction_project, conversion_expand, time_indexed_violation,
    CompactionCheck, ConversionCheck,
};
pub use extension::{Extension, ExtensionMode, DEFAULT_MC_SAMPLES, EXACT_GRADIENT_LIMIT};
pub use greedy::{continuous_greedy, GreedyReport, GreedyRun, SmoothObjective, DEFAULT_STEPS};
pub use lp::{lp_maximize, LinearPolytope, LpSolution};
pub use relaxation::{
    build_full_relaxation, full_index, full_polytope, FullObjective, TimeIndexedSolution, FULL_RELAXATION_LIMIT,
};
pub use pipeline::{
    algorithm5, preprocess, prepare_algorithm5, prepare_pseudopoly, sweep_algorithm5, Alg5Config, Alg5Draw,
    Alg5Prepared, Alg5Report, LpStats, Preprocessed, PseudoConfig, PseudoPrepared, SeedSweep,
};
pub use rounding::{
    crs_verify, order_by_times, round_solution, second_round, CrsConfig, CrsReport, ItemSurvival, MonotonePair,
    Rounding, StartSampler, SurvivalRule, CRS_MIN_TRIALS,
};
