use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::lp::{lp_maximize, LinearPolytope};

/// Default number of continuous-greedy steps.
pub const DEFAULT_STEPS: usize = 200;

/// A smooth monotone submodular objective over the variables of a polytope.
pub trait SmoothObjective<S> {
    fn dim(&self) -> usize;
    fn value(&self, v: &[S]) -> S;
    fn gradient(&self, v: &[S]) -> Vec<S>;
}

/// Trace of one continuous-greedy run.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyRun<S> {
    /// Final point `v`; `v/b` lies in the polytope.
    pub point: Vec<S>,
    /// Objective after each step, starting with the origin.
    pub values: Vec<S>,
    /// Simplex pivots summed over all steps.
    pub pivots: usize,
    pub stopping_time: S,
    pub steps: usize,
}

impl<S: Scalar> GreedyRun<S> {
    pub fn value(&self) -> &S {
        self.values.last().expect("values start with the origin")
    }

    /// Whether the recorded values never decrease, up to `tol`.
    pub fn is_nondecreasing(&self, tol: &S) -> bool {
        self.values.windows(2).all(|w| w[1].clone() + tol.clone() >= w[0])
    }

    pub fn report(&self) -> GreedyReport {
        GreedyReport {
            stopping_time: self.stopping_time.to_f64_lossy(),
            steps: self.steps,
            pivots: self.pivots,
            values: self.values.iter().map(Scalar::to_f64_lossy).collect(),
        }
    }
}

/// Serializable summary of a [`GreedyRun`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyReport {
    pub stopping_time: f64,
    pub steps: usize,
    pub pivots: usize,
    pub values: Vec<f64>,
}

/// Continuous greedy with stopping time `b`: `N` steps of
/// `v ← v + (b/N)·argmax_{u∈P} ⟨∇F(v), u⟩`.
pub fn continuous_greedy<S: Scalar, O: SmoothObjective<S> + ?Sized>(
    objective: &O,
    poly: &LinearPolytope<S>,
    stopping_time: &S,
    steps: usize,
) -> Result<GreedyRun<S>> {
    if !(*stopping_time > S::zero() && *stopping_time <= S::one()) {
        return Err(Error::InvalidParameter(format!(
            "stopping time {} must lie in (0, 1]",
            stopping_time.render()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("continuous greedy needs at least one step".into()));
    }
    if objective.dim() != poly.dim() {
        return Err(Error::InvalidParameter(format!(
            "objective has {} variables, polytope has {}",
            objective.dim(),
            poly.dim()
        )));
    }
    let delta = stopping_time.clone() / S::from_u64_exact(steps as u64);
    let mut v = vec![S::zero(); poly.dim()];
    let mut values = vec![objective.value(&v)];
    let mut pivots = 0;
    for _ in 0..steps {
        let g = objective.gradient(&v);
        let sol = lp_maximize(poly, &g)?;
        pivots += sol.pivots;
        for (vi, ui) in v.iter_mut().zip(&sol.x) {
            *vi = vi.clone() + delta.clone() * ui.clone();
        }
        values.push(objective.value(&v));
    }
    Ok(GreedyRun {
        point: v,
        values,
        pivots,
        stopping_time: stopping_time.clone(),
        steps,
    })
}
