use serde_json::json;

use crate::error::{Error, Result};
use crate::instances::{CapacityDistribution, Instance};
use crate::scalar::Scalar;

use super::extension::Extension;
use super::greedy::SmoothObjective;
use super::lp::LinearPolytope;

/// Largest `T·n` accepted by [`build_full_relaxation`].
pub const FULL_RELAXATION_LIMIT: usize = 6000;

/// Time-indexed fractional solution: `x[t][i]` for `t ∈ 0..T`, stored
/// row-major by time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeIndexedSolution<S> {
    horizon: u64,
    sizes: Vec<u64>,
    x: Vec<S>,
}

impl<S: Scalar> TimeIndexedSolution<S> {
    pub fn new(horizon: u64, sizes: Vec<u64>, x: Vec<S>) -> Result<Self> {
        if x.len() as u64 != horizon * sizes.len() as u64 {
            return Err(Error::InvalidParameter(format!(
                "{} values for horizon {horizon} and {} items",
                x.len(),
                sizes.len()
            )));
        }
        if x.iter().any(|v| *v < S::zero()) {
            return Err(Error::InvalidParameter("time-indexed values must be nonnegative".into()));
        }
        Ok(TimeIndexedSolution { horizon, sizes, x })
    }

    pub fn zeros(horizon: u64, sizes: Vec<u64>) -> Self {
        let x = vec![S::zero(); horizon as usize * sizes.len()];
        TimeIndexedSolution { horizon, sizes, x }
    }

    /// Indicator solution of a sequence run without cancellation: each item
    /// is picked at the total size of the items before it, when that time
    /// is below the horizon.
    pub fn from_sequence(horizon: u64, sizes: Vec<u64>, order: &[usize]) -> Self {
        let mut sol = Self::zeros(horizon, sizes);
        let mut start = 0u64;
        for &i in order {
            if start < horizon {
                sol.set(start, i, S::one());
            }
            start = start.saturating_add(sol.sizes[i]);
        }
        sol
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn as_slice(&self) -> &[S] {
        &self.x
    }

    pub fn get(&self, t: u64, i: usize) -> &S {
        &self.x[t as usize * self.n() + i]
    }

    pub fn set(&mut self, t: u64, i: usize, v: S) {
        let n = self.n();
        self.x[t as usize * n + i] = v;
    }

    pub fn scaled(&self, factor: &S) -> Self {
        TimeIndexedSolution {
            horizon: self.horizon,
            sizes: self.sizes.clone(),
            x: self.x.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }

    /// `x̄_{ti} = Σ_{t′ ≤ t − s(i)} x_{t′i}`, zero when `t < s(i)`.
    pub fn xbar(&self, t: u64) -> Vec<S> {
        (0..self.n())
            .map(|i| match t.checked_sub(self.sizes[i]) {
                None => S::zero(),
                Some(last) => (0..=last.min(self.horizon.saturating_sub(1)))
                    .take_while(|_| self.horizon > 0)
                    .fold(S::zero(), |acc, tp| acc + self.get(tp, i).clone()),
            })
            .collect()
    }

    /// `F̄(x) = Σ_t p(t)·F(x̄_t)`.
    pub fn objective(&self, ext: &Extension<S>, dist: &CapacityDistribution<S>) -> S {
        dist.support()
            .filter(|(t, _)| *t >= 1)
            .fold(S::zero(), |acc, (t, p)| acc + p.clone() * ext.value(&self.xbar(t)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = (0..self.horizon)
            .map(|t| (0..self.n()).map(|i| self.get(t, i).render()).collect())
            .collect();
        json!({ "horizon": self.horizon, "x": rows })
    }
}

/// Variable index of `x_{ti}`.
pub fn full_index(n: usize, t: u64, i: usize) -> usize {
    t as usize * n + i
}

/// Constraint system of the time-indexed relaxation over `x_{ti}`,
/// `t ∈ 0..T`: `Σ_t x_{ti} ≤ 1` per item, then for `t = 1..=T`:
/// `Σ_i Σ_{t′ ≤ t} x_{t′i}·min(s(i), t) ≤ 2t`.
pub fn full_polytope<S: Scalar>(sizes: &[u64], horizon: u64) -> Result<LinearPolytope<S>> {
    let n = sizes.len();
    let dim = horizon as usize * n;
    if horizon as u128 * n as u128 > FULL_RELAXATION_LIMIT as u128 {
        return Err(Error::capability("time-indexed relaxation variables", dim, FULL_RELAXATION_LIMIT));
    }
    let mut poly = LinearPolytope::new(dim);
    for i in 0..n {
        let terms: Vec<(usize, S)> = (0..horizon).map(|t| (full_index(n, t, i), S::one())).collect();
        poly.add_constraint(&terms, S::one())?;
    }
    for t in 1..=horizon {
        let mut terms = Vec::new();
        for (i, &s) in sizes.iter().enumerate() {
            let w = S::from_u64_exact(s.min(t));
            for tp in 0..=t.min(horizon - 1) {
                terms.push((full_index(n, tp, i), w.clone()));
            }
        }
        poly.add_constraint(&terms, S::from_u64_exact(2 * t))?;
    }
    Ok(poly)
}

/// The time-indexed relaxation for `inst` with the horizon of `dist`.
pub fn build_full_relaxation<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
) -> Result<LinearPolytope<S>> {
    full_polytope(&inst.sizes(), dist.horizon())
}

/// `F̄` as a smooth objective over the flattened `x`.
pub struct FullObjective<'a, S> {
    ext: &'a Extension<S>,
    sizes: Vec<u64>,
    horizon: u64,
    support: Vec<(u64, S)>,
}

impl<'a, S: Scalar> FullObjective<'a, S> {
    pub fn new(ext: &'a Extension<S>, sizes: Vec<u64>, dist: &CapacityDistribution<S>) -> Self {
        FullObjective {
            ext,
            sizes,
            horizon: dist.horizon(),
            support: dist.support().filter(|(t, _)| *t >= 1).map(|(t, p)| (t, p.clone())).collect(),
        }
    }

    fn solution(&self, v: &[S]) -> TimeIndexedSolution<S> {
        TimeIndexedSolution {
            horizon: self.horizon,
            sizes: self.sizes.clone(),
            x: v.to_vec(),
        }
    }
}

impl<S: Scalar> SmoothObjective<S> for FullObjective<'_, S> {
    fn dim(&self) -> usize {
        self.horizon as usize * self.sizes.len()
    }

    fn value(&self, v: &[S]) -> S {
        let sol = self.solution(v);
        self.support
            .iter()
            .fold(S::zero(), |acc, (t, p)| acc + p.clone() * self.ext.value(&sol.xbar(*t)))
    }

    fn gradient(&self, v: &[S]) -> Vec<S> {
        let sol = self.solution(v);
        let n = self.sizes.len();
        let mut grad = vec![S::zero(); self.dim()];
        for (t, p) in &self.support {
            let g = self.ext.gradient(&sol.xbar(*t));
            for (i, gi) in g.iter().enumerate() {
                let Some(last) = t.checked_sub(self.sizes[i]) else {
                    continue;
                };
                let w = p.clone() * gi.clone();
                for tp in 0..=last.min(self.horizon - 1) {
                    let k = full_index(n, tp, i);
                    grad[k] = grad[k].clone() + w.clone();
                }
            }
        }
        grad
    }
}
