use std::cell::Cell;

use serde::Serialize;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::submodular::{
    gradient_from_values, multilinear_from_values, multilinear_gradient, multilinear_mc, FractionalVector,
    GradientMode, SubmodularFunction, ValueTable,
};

/// Largest ground set evaluated with exact multilinear enumeration by
/// default.
pub const EXACT_GRADIENT_LIMIT: usize = 12;

/// Default Monte-Carlo sample count per evaluation.
pub const DEFAULT_MC_SAMPLES: u64 = 2000;

/// How the multilinear extension is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ExtensionMode {
    Exact,
    /// Each evaluation draws `samples` sets from a stream derived from
    /// `seed` and a per-call counter.
    MonteCarlo { samples: u64, seed: u64 },
}

impl ExtensionMode {
    /// Exact for small ground sets, otherwise Monte-Carlo with the default
    /// sample count.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= EXACT_GRADIENT_LIMIT {
            ExtensionMode::Exact
        } else {
            ExtensionMode::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            }
        }
    }
}

/// Multilinear extension `F` of a set function with cached subset values.
#[derive(Debug)]
pub struct Extension<S> {
    f: SubmodularFunction<S>,
    table: Option<ValueTable<S>>,
    mode: ExtensionMode,
    calls: Cell<u64>,
}

impl<S: Scalar> Extension<S> {
    pub fn new(f: &SubmodularFunction<S>, mode: ExtensionMode) -> Result<Self> {
        let table = match mode {
            ExtensionMode::Exact => Some(ValueTable::build(f)?),
            ExtensionMode::MonteCarlo { .. } => None,
        };
        Ok(Extension {
            f: f.clone(),
            table,
            mode,
            calls: Cell::new(0),
        })
    }

    pub fn mode(&self) -> ExtensionMode {
        self.mode
    }

    pub fn ground_size(&self) -> usize {
        self.f.ground_size()
    }

    fn next_seed(&self, seed: u64) -> u64 {
        let c = self.calls.get();
        self.calls.set(c + 1);
        seed ^ c.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    fn vector(x: &[S]) -> FractionalVector<S> {
        FractionalVector::clamped(x.to_vec())
    }

    /// `F(x)`; coordinates are clamped into `[0, 1]`.
    pub fn value(&self, x: &[S]) -> S {
        let v = Self::vector(x);
        match (&self.table, self.mode) {
            (Some(t), _) => multilinear_from_values(t.values(), v.as_slice()),
            (None, ExtensionMode::MonteCarlo { samples, seed }) => {
                let est = multilinear_mc(&self.f, &v, samples, self.next_seed(seed)).expect("dimensions match");
                S::from_f64_lossy(est.mean)
            }
            (None, ExtensionMode::Exact) => unreachable!("exact mode always has a table"),
        }
    }

    /// `∇F(x)`.
    pub fn gradient(&self, x: &[S]) -> Vec<S> {
        let v = Self::vector(x);
        match (&self.table, self.mode) {
            (Some(t), _) => gradient_from_values(t.values(), v.as_slice()),
            (None, ExtensionMode::MonteCarlo { samples, seed }) => multilinear_gradient(
                &self.f,
                &v,
                GradientMode::MonteCarlo {
                    samples,
                    seed: self.next_seed(seed),
                },
            )
            .expect("dimensions match"),
            (None, ExtensionMode::Exact) => unreachable!("exact mode always has a table"),
        }
    }
}
