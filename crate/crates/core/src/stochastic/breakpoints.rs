use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{CapacityDistribution, Instance};
use crate::scalar::Scalar;
use crate::submodular::SetFunction;

use super::extension::Extension;
use super::greedy::SmoothObjective;
use super::lp::LinearPolytope;

/// Geometric and tail-driven time points `τ` and the block boundaries `ξ`
/// that compress the time-indexed relaxation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakpointStructure {
    pub epsilon: f64,
    /// `W = f(I)`.
    pub big_w: f64,
    /// `w = min_i f({i})`.
    pub small_w: f64,
    /// `log₂ T`, or 1 when `T = 1`.
    pub log_t: f64,
    /// True when `T = 1` forced the `log T` guard.
    pub log_guarded: bool,
    /// `εw/(W log T)`.
    pub threshold: f64,
    pub eta: u64,
    /// `τ′_1, τ′_2, …`; `T` marks a threshold `p̄` never drops below.
    pub tau_prime: Vec<u64>,
    /// `τ_0 = 0 < τ_1 = 1 < … < τ_{q+1} = T`.
    pub tau: Vec<u64>,
    pub q_eta: usize,
    /// `ξ_0 = 0 < … < ξ_{r+1} = T`.
    pub xi: Vec<u64>,
    pub horizon: u64,
    pub sizes: Vec<u64>,
}

fn ceil_log2(t: u64) -> u32 {
    if t <= 1 {
        0
    } else {
        64 - (t - 1).leading_zeros()
    }
}

/// Smallest `t ∈ [0, T−1]` with `p̄(t) < threshold`, or `T` when none.
fn first_below<S: Scalar>(dist: &CapacityDistribution<S>, threshold: f64) -> u64 {
    let (mut lo, mut hi) = (0u64, dist.horizon());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if dist.pbar(mid).to_f64_lossy() < threshold {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Whether `Pr[C ≥ s] = 1`, exactly for exact scalars and within `1e-12`
/// otherwise.
pub fn full_mass_at_least<S: Scalar>(dist: &CapacityDistribution<S>, s: u64) -> Result<bool> {
    let tail = dist.tail(s.min(dist.horizon() + 1))?;
    Ok(if S::EXACT {
        tail == S::one()
    } else {
        (1.0 - tail.to_f64_lossy()).abs() <= 1e-12
    })
}

impl BreakpointStructure {
    /// Builds the structure. Requires `ε ∈ (0,1)`, positive singleton values,
    /// `T ≥ Σ s(i)` and `Pr[C ≥ min_i s(i)] = 1`.
    pub fn build<S: Scalar>(inst: &Instance<S>, dist: &CapacityDistribution<S>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("ε = {epsilon} must lie in (0, 1)")));
        }
        let n = inst.n();
        if n == 0 {
            return Err(Error::Precondition("the instance has no items".into()));
        }
        let horizon = dist.horizon();
        if horizon < inst.total_size() {
            return Err(Error::Precondition(format!(
                "horizon {horizon} is below the total size {}",
                inst.total_size()
            )));
        }
        let small_w = (0..n)
            .map(|i| inst.singleton_value(i).to_f64_lossy())
            .fold(f64::INFINITY, f64::min);
        if small_w <= 0.0 {
            return Err(Error::Precondition("items of value zero must be removed first".into()));
        }
        let s_min = inst.min_size().expect("nonempty instance");
        if !full_mass_at_least(dist, s_min)? {
            return Err(Error::Precondition(format!(
                "Pr[C ≥ {s_min}] = {} is not 1; pass the permissive flag to condition on C ≥ {s_min}",
                dist.tail(s_min)?.render()
            )));
        }
        let big_w = inst.value(inst.all_items()).to_f64_lossy();
        let log_guarded = horizon == 1;
        let log_t = if log_guarded { 1.0 } else { (horizon as f64).log2() };
        let threshold = epsilon * small_w / (big_w * log_t);
        let eta = (threshold.ln() / (1.0 - epsilon).ln()).floor().max(0.0) as u64;

        let mut tau_prime = Vec::new();
        for j in 1..=eta + 2 {
            let t = first_below(dist, (1.0 - epsilon).powi((j - 1) as i32));
            tau_prime.push(t);
            if t == horizon {
                break;
            }
        }
        let mut points: BTreeSet<u64> = tau_prime.iter().copied().filter(|&t| t > 0 && t < horizon).collect();
        points.extend((0..ceil_log2(horizon)).map(|j| 1u64 << j));
        points.retain(|&t| t < horizon);
        let mut tau = vec![0];
        tau.extend(points);
        tau.push(horizon);

        let q = tau.len() - 2;
        let q_eta = (0..=q)
            .rev()
            .find(|&j| dist.pbar(tau[j]).to_f64_lossy() >= threshold)
            .unwrap_or(0);
        let sizes = inst.sizes();
        let xi = xi_points(&tau, &sizes, horizon);
        Ok(BreakpointStructure {
            epsilon,
            big_w,
            small_w,
            log_t,
            log_guarded,
            threshold,
            eta,
            tau_prime,
            tau,
            q_eta,
            xi,
            horizon,
            sizes,
        })
    }

    pub fn q(&self) -> usize {
        self.tau.len() - 2
    }

    pub fn r(&self) -> usize {
        self.xi.len() - 2
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    /// Number of blocks `[ξ_k, ξ_{k+1})`, `k = 0..=r`.
    pub fn blocks(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn block(&self, k: usize) -> (u64, u64) {
        (self.xi[k], self.xi[k + 1])
    }

    /// Block containing time `t < T`.
    pub fn block_of(&self, t: u64) -> usize {
        self.xi.partition_point(|&x| x <= t) - 1
    }

    /// Variable index of `y_{ki}`.
    pub fn index(&self, k: usize, i: usize) -> usize {
        k * self.n() + i
    }

    pub fn dim(&self) -> usize {
        self.blocks() * self.n()
    }

    /// Number of leading blocks summed into `z_{ji}`: blocks with
    /// `ξ_{k+1} − 1 ≤ τ_j − s(i)`.
    pub fn z_blocks(&self, j: usize, i: usize) -> usize {
        match (self.tau[j] + 1).checked_sub(self.sizes[i]) {
            None => 0,
            Some(limit) => self.xi[1..].partition_point(|&x| x <= limit),
        }
    }

    /// Every violated structural property, described in words.
    pub fn violations<S: Scalar>(&self, dist: &CapacityDistribution<S>) -> Vec<String> {
        let mut out = Vec::new();
        let pbar = |t: u64| dist.pbar(t).to_f64_lossy();
        let q = self.q();
        if self.tau[0] != 0 {
            out.push(format!("τ_0 = {}", self.tau[0]));
        }
        if self.tau[1] != 1 {
            out.push(format!("τ_1 = {}", self.tau[1]));
        }
        if self.tau[q + 1] != self.horizon {
            out.push(format!("τ_(q+1) = {} ≠ T = {}", self.tau[q + 1], self.horizon));
        }
        for j in 1..=q {
            let (a, b) = (self.tau[j], self.tau[j + 1]);
            if !(a < b && b <= 2 * a) {
                out.push(format!("τ_{j} = {a}, τ_{} = {b} break τ_j < τ_(j+1) ≤ 2τ_j", j + 1));
            }
        }
        for j in 0..=self.q_eta.min(q) {
            let hi = pbar(self.tau[j]);
            let mid = pbar(self.tau[j + 1] - 1);
            if !(hi >= mid && mid >= (1.0 - self.epsilon) * hi) {
                out.push(format!(
                    "j = {j}: p̄(τ_j) = {hi}, p̄(τ_(j+1) − 1) = {mid} outside the (1 − ε) band"
                ));
            }
        }
        for j in self.q_eta + 1..=q {
            let v = pbar(self.tau[j]);
            if v >= self.threshold {
                out.push(format!("j = {j}: p̄(τ_j) = {v} is not below {}", self.threshold));
            }
        }
        if self.xi != xi_points(&self.tau, &self.sizes, self.horizon) {
            out.push("ξ differs from the τ and τ − s + 1 points".into());
        }
        out
    }
}

fn xi_points(tau: &[u64], sizes: &[u64], horizon: u64) -> Vec<u64> {
    let mut xi: BTreeSet<u64> = tau.iter().copied().collect();
    for &t in &tau[1..] {
        for &s in sizes {
            if let Some(v) = (t + 1).checked_sub(s) {
                if v <= horizon {
                    xi.insert(v);
                }
            }
        }
    }
    xi.into_iter().collect()
}

/// Constraint system of the compact relaxation over `y_{ki}`: `Σ_k y_{ki} ≤ 1`
/// per item, then for `j = 1..=q`: `Σ_i Σ_{ξ_k < τ_j} y_{ki}·min(s(i), τ_j) ≤ 2τ_j`.
pub fn compact_polytope<S: Scalar>(bp: &BreakpointStructure) -> Result<LinearPolytope<S>> {
    let n = bp.n();
    let mut poly = LinearPolytope::new(bp.dim());
    for i in 0..n {
        let terms: Vec<(usize, S)> = (0..bp.blocks()).map(|k| (bp.index(k, i), S::one())).collect();
        poly.add_constraint(&terms, S::one())?;
    }
    for j in 1..=bp.q() {
        let tj = bp.tau[j];
        let mut terms = Vec::new();
        for (i, &s) in bp.sizes.iter().enumerate() {
            let w = S::from_u64_exact(s.min(tj));
            for k in (0..bp.blocks()).take_while(|&k| bp.xi[k] < tj) {
                terms.push((bp.index(k, i), w.clone()));
            }
        }
        poly.add_constraint(&terms, S::from_u64_exact(2 * tj))?;
    }
    Ok(poly)
}

/// Breakpoints and the compact relaxation's constraint system.
pub fn build_compact_relaxation<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    epsilon: f64,
) -> Result<(BreakpointStructure, LinearPolytope<S>)> {
    let bp = BreakpointStructure::build(inst, dist, epsilon)?;
    let poly = compact_polytope(&bp)?;
    Ok((bp, poly))
}

/// Compact fractional solution `y_{ki}`, stored block-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSolution<S> {
    n: usize,
    y: Vec<S>,
}

impl<S: Scalar> CompactSolution<S> {
    pub fn new(bp: &BreakpointStructure, y: Vec<S>) -> Result<Self> {
        if y.len() != bp.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} blocks and {} items",
                y.len(),
                bp.blocks(),
                bp.n()
            )));
        }
        if y.iter().any(|v| *v < S::zero()) {
            return Err(Error::InvalidParameter("compact values must be nonnegative".into()));
        }
        Ok(CompactSolution { n: bp.n(), y })
    }

    pub fn zeros(bp: &BreakpointStructure) -> Self {
        CompactSolution {
            n: bp.n(),
            y: vec![S::zero(); bp.dim()],
        }
    }

    pub fn as_slice(&self) -> &[S] {
        &self.y
    }

    pub fn get(&self, k: usize, i: usize) -> &S {
        &self.y[k * self.n + i]
    }

    pub fn scaled(&self, factor: &S) -> Self {
        CompactSolution {
            n: self.n,
            y: self.y.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }

    /// `z_j` for `j = 0..=q+1`.
    pub fn z(&self, bp: &BreakpointStructure, j: usize) -> Vec<S> {
        z_vector(bp, &self.y, j)
    }

    /// Compact objective `θ = Σ_{j=0}^{q} p̄(τ_j)(F(z_{j+1}) − F(z_j))`.
    pub fn theta(&self, bp: &BreakpointStructure, ext: &Extension<S>, dist: &CapacityDistribution<S>) -> S {
        CompactObjective::new(ext, bp, dist).value(&self.y)
    }

    pub fn is_feasible(&self, bp: &BreakpointStructure, tol: &S) -> Result<bool> {
        Ok(compact_polytope::<S>(bp)?.contains(&self.y, tol))
    }
}

fn z_vector<S: Scalar>(bp: &BreakpointStructure, y: &[S], j: usize) -> Vec<S> {
    let n = bp.n();
    (0..n)
        .map(|i| {
            (0..bp.z_blocks(j, i)).fold(S::zero(), |acc, k| acc + y[k * n + i].clone())
        })
        .collect()
}

/// The compact objective written as `Σ_{j=1}^{q+1} c_j F(z_j)` with
/// `c_j = p̄(τ_{j−1}) − p̄(τ_j)`.
pub struct CompactObjective<'a, S> {
    ext: &'a Extension<S>,
    bp: &'a BreakpointStructure,
    coeffs: Vec<(usize, S)>,
}

impl<'a, S: Scalar> CompactObjective<'a, S> {
    pub fn new(ext: &'a Extension<S>, bp: &'a BreakpointStructure, dist: &CapacityDistribution<S>) -> Self {
        let coeffs = (1..=bp.q() + 1)
            .map(|j| (j, dist.pbar(bp.tau[j - 1]) - dist.pbar(bp.tau[j])))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        CompactObjective { ext, bp, coeffs }
    }

    /// `(j, c_j)` for the nonzero coefficients.
    pub fn coefficients(&self) -> &[(usize, S)] {
        &self.coeffs
    }
}

impl<S: Scalar> SmoothObjective<S> for CompactObjective<'_, S> {
    fn dim(&self) -> usize {
        self.bp.dim()
    }

    fn value(&self, v: &[S]) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, (j, c)| {
            acc + c.clone() * self.ext.value(&z_vector(self.bp, v, *j))
        })
    }

    fn gradient(&self, v: &[S]) -> Vec<S> {
        let n = self.bp.n();
        let mut grad = vec![S::zero(); self.dim()];
        for (j, c) in &self.coeffs {
            let g = self.ext.gradient(&z_vector(self.bp, v, *j));
            for (i, gi) in g.iter().enumerate() {
                let w = c.clone() * gi.clone();
                for k in 0..self.bp.z_blocks(*j, i) {
                    grad[k * n + i] = grad[k * n + i].clone() + w.clone();
                }
            }
        }
        grad
    }
}

/// `f` restricted to the compact objective's linear case: when `f` is
/// modular, `θ` is linear in `y` with these weights.
pub fn modular_compact_weights<S: Scalar>(
    bp: &BreakpointStructure,
    dist: &CapacityDistribution<S>,
    f: &impl SetFunction<S>,
) -> Vec<S> {
    let n = bp.n();
    let single: Vec<S> = (0..n).map(|i| f.value(crate::ItemSet::singleton(i))).collect();
    let mut w = vec![S::zero(); bp.dim()];
    for j in 1..=bp.q() + 1 {
        let c = dist.pbar(bp.tau[j - 1]) - dist.pbar(bp.tau[j]);
        for (i, fi) in single.iter().enumerate() {
            for k in 0..bp.z_blocks(j, i) {
                w[k * n + i] = w[k * n + i].clone() + c.clone() * fi.clone();
            }
        }
    }
    w
}
