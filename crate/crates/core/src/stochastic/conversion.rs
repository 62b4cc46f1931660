use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::CapacityDistribution;
use crate::scalar::Scalar;

use super::breakpoints::{compact_polytope, BreakpointStructure, CompactSolution};
use super::extension::Extension;
use super::relaxation::TimeIndexedSolution;

/// Largest constraint violation of `x` in the time-indexed relaxation,
/// computed directly in `O(T·n)`; nonpositive when feasible.
pub fn time_indexed_violation<S: Scalar>(x: &TimeIndexedSolution<S>) -> S {
    let n = x.n();
    let horizon = x.horizon();
    let mut worst = -S::one();
    let mut cum = vec![S::zero(); n];
    for t in 0..horizon {
        for (i, c) in cum.iter_mut().enumerate() {
            *c = c.clone() + x.get(t, i).clone();
        }
    }
    for c in &cum {
        worst = S::max_of(worst, c.clone() - S::one());
    }
    // columns t′ ≤ min(t, T−1), starting with t′ = 0
    for (i, c) in cum.iter_mut().enumerate() {
        *c = if horizon > 0 { x.get(0, i).clone() } else { S::zero() };
    }
    for t in 1..=horizon {
        if t < horizon {
            for (i, c) in cum.iter_mut().enumerate() {
                *c = c.clone() + x.get(t, i).clone();
            }
        }
        let load = x.sizes().iter().zip(&cum).fold(S::zero(), |acc, (&s, c)| {
            acc + S::from_u64_exact(s.min(t)) * c.clone()
        });
        worst = S::max_of(worst, load - S::from_u64_exact(2 * t));
    }
    worst
}

/// `x_{ti} = y_{ki}/(ξ_{k+1} − ξ_k)` for `t` in block `k`. When `y` is
/// feasible for the compact relaxation, `x/2` is feasible for the
/// time-indexed one.
pub fn conversion_expand<S: Scalar>(
    y: &CompactSolution<S>,
    bp: &BreakpointStructure,
) -> Result<TimeIndexedSolution<S>> {
    if !y.is_feasible(bp, &S::tolerance())? {
        return Err(Error::Precondition("y is infeasible for the compact relaxation".into()));
    }
    Ok(expand_unchecked(y, bp))
}

pub(crate) fn expand_unchecked<S: Scalar>(y: &CompactSolution<S>, bp: &BreakpointStructure) -> TimeIndexedSolution<S> {
    let mut x = TimeIndexedSolution::zeros(bp.horizon, bp.sizes.clone());
    for k in 0..bp.blocks() {
        let (lo, hi) = bp.block(k);
        let width = S::from_u64_exact(hi - lo);
        for i in 0..bp.n() {
            let v = y.get(k, i).clone() / width.clone();
            for t in lo..hi {
                x.set(t, i, v.clone());
            }
        }
    }
    x
}

/// `y_{ki} = Σ_{t=ξ_k}^{ξ_{k+1}−1} x_{ti}`; requires `x` feasible for the
/// time-indexed relaxation.
pub fn compaction_project<S: Scalar>(
    x: &TimeIndexedSolution<S>,
    bp: &BreakpointStructure,
) -> Result<CompactSolution<S>> {
    if x.horizon() != bp.horizon || x.sizes() != bp.sizes.as_slice() {
        return Err(Error::InvalidParameter("x and the breakpoints describe different instances".into()));
    }
    if time_indexed_violation(x) > S::tolerance() {
        return Err(Error::Precondition("x is infeasible for the time-indexed relaxation".into()));
    }
    let n = bp.n();
    let mut y = vec![S::zero(); bp.dim()];
    for k in 0..bp.blocks() {
        let (lo, hi) = bp.block(k);
        for i in 0..n {
            y[k * n + i] = (lo..hi).fold(S::zero(), |acc, t| acc + x.get(t, i).clone());
        }
    }
    CompactSolution::new(bp, y)
}

/// Outcome of projecting a time-indexed solution onto the compact one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactionCheck {
    pub max_violation: f64,
    pub fbar: f64,
    pub theta: f64,
    pub feasible: bool,
    /// `θ(y) ≥ F̄(x)`.
    pub holds: bool,
}

/// Projects `x` and checks feasibility of the image and `θ ≥ F̄(x)` within
/// `tol`.
pub fn check_compaction<S: Scalar>(
    x: &TimeIndexedSolution<S>,
    bp: &BreakpointStructure,
    ext: &Extension<S>,
    dist: &CapacityDistribution<S>,
    tol: f64,
) -> Result<CompactionCheck> {
    let y = compaction_project(x, bp)?;
    let poly = compact_polytope::<S>(bp)?;
    let max_violation = poly.max_violation(y.as_slice()).to_f64_lossy();
    let fbar = x.objective(ext, dist).to_f64_lossy();
    let theta = y.theta(bp, ext, dist).to_f64_lossy();
    let feasible = max_violation <= tol;
    Ok(CompactionCheck {
        max_violation,
        fbar,
        theta,
        feasible,
        holds: feasible && theta + tol >= fbar,
    })
}

/// Outcome of expanding a compact solution into a time-indexed one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConversionCheck {
    /// Largest violation of `x/2` in the time-indexed relaxation.
    pub max_violation: f64,
    pub theta: f64,
    /// `F̄(x/2)`.
    pub fbar_half: f64,
    /// `(1−ε)(θ − εw)/2`.
    pub bound: f64,
    pub feasible: bool,
    pub holds: bool,
}

/// Expands `y` and checks feasibility of `x/2` and
/// `F̄(x/2) ≥ (1−ε)(θ − εw)/2` within `tol`.
pub fn check_conversion<S: Scalar>(
    y: &CompactSolution<S>,
    bp: &BreakpointStructure,
    ext: &Extension<S>,
    dist: &CapacityDistribution<S>,
    tol: f64,
) -> Result<ConversionCheck> {
    let x = conversion_expand(y, bp)?;
    let half = x.scaled(&S::from_ratio(1, 2));
    let max_violation = time_indexed_violation(&half).to_f64_lossy();
    let theta = y.theta(bp, ext, dist).to_f64_lossy();
    let fbar_half = half.objective(ext, dist).to_f64_lossy();
    let eps = bp.epsilon;
    let bound = (1.0 - eps) * (theta - eps * bp.small_w) / 2.0;
    let feasible = max_violation <= tol;
    Ok(ConversionCheck {
        max_violation,
        theta,
        fbar_half,
        bound,
        feasible,
        holds: feasible && fbar_half + tol >= bound,
    })
}
