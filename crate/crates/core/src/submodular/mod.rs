//! Monotone submodular set functions, their multilinear extensions and
//! exhaustive structural checks.

mod function;
pub(crate) mod json;
mod multilinear;
mod set;
mod verify;

pub use function::{ConcaveMap, SetFunction, SubmodularFunction, ValueTable, TABLE_LIMIT, VALUE_TABLE_LIMIT};
pub use multilinear::{
    gradient_from_values, multilinear_exact, multilinear_from_values, multilinear_gradient,
    multilinear_mc, multilinear_mc_parallel, subset_probabilities, FractionalVector, GradientMode,
    McEstimate, MULTILINEAR_EXACT_LIMIT,
};
pub(crate) use multilinear::task_rng;
pub use set::{ItemSet, MAX_ITEMS};
pub use verify::{
    verify_structure, verify_structure_sampled, Axiom, AxiomResult, StructureReport, Witness,
    EXHAUSTIVE_LIMIT,
};
