use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::policies::{mixture_worst_case, policy_frontier, PolicyOutcome};
use crate::scalar::Scalar;
use crate::stochastic::{lp_maximize, LinearPolytope};

use super::smpsc::next_permutation;

/// Largest `n` for the geometric sequence sweep (`n!` orders).
pub const GEOMETRIC_SWEEP_LIMIT: u32 = 8;

/// Worst-case ratios of every sequence on the geometric instance without
/// cancellation, over capacities `M, M², …, Mⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricSweep {
    pub m: u64,
    pub n: u32,
    /// `(order, min_C f(Π(C))/f(OPT_C))` for each order, lexicographic.
    pub sequences: Vec<(Vec<usize>, BigRational)>,
}

impl GeometricSweep {
    /// `1/n + 2/M`.
    pub fn bound(&self) -> BigRational {
        BigRational::new(1.into(), self.n.into()) + BigRational::new(2.into(), self.m.into())
    }

    /// Best worst-case ratio over all sequences.
    pub fn best(&self) -> BigRational {
        self.sequences
            .iter()
            .map(|(_, r)| r.clone())
            .max()
            .unwrap_or_else(BigRational::one)
    }

    /// Smallest worst-case ratio over all sequences.
    pub fn worst(&self) -> BigRational {
        self.sequences
            .iter()
            .map(|(_, r)| r.clone())
            .min()
            .unwrap_or_else(BigRational::one)
    }

    /// Whether every sequence stays at or below `1/n + 2/M`.
    pub fn within_bound(&self) -> bool {
        let b = self.bound();
        self.sequences.iter().all(|(_, r)| *r <= b)
    }
}

/// Enumerates all `n!` sequences with big-integer sizes `M^1..M^n`.
pub fn geometric_sweep(m: u64, n: u32) -> Result<GeometricSweep> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M = {m} must be at least 2")));
    }
    if n > GEOMETRIC_SWEEP_LIMIT {
        return Err(Error::capability("geometric sequence sweep", n as usize, GEOMETRIC_SWEEP_LIMIT as usize));
    }
    let base = BigUint::from(m);
    let sizes: Vec<BigUint> = (1..=n).map(|e| base.pow(e)).collect();
    let n = n as usize;
    // OPT per capacity by subset enumeration; sizes equal weights
    let opts: Vec<BigUint> = sizes
        .iter()
        .map(|cap| {
            (0u32..1 << n)
                .map(|mask| {
                    (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .fold(BigUint::zero(), |a, i| a + &sizes[i])
                })
                .filter(|s| s <= cap)
                .max()
                .unwrap_or_default()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut sequences = Vec::new();
    loop {
        let mut worst: Option<BigRational> = None;
        for (cap, opt) in sizes.iter().zip(&opts) {
            let mut used = BigUint::zero();
            for &i in &order {
                let next = &used + &sizes[i];
                if next > *cap {
                    break;
                }
                used = next;
            }
            let r = BigRational::new(used.into(), opt.clone().into());
            if worst.as_ref().is_none_or(|w| r < *w) {
                worst = Some(r);
            }
        }
        sequences.push((order.clone(), worst.unwrap_or_else(BigRational::one)));
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(GeometricSweep { m, n: n as u32, sequences })
}

/// Value of the zero-sum game where the policy mixes over `outcomes` and
/// the adversary picks a capacity: `max_λ min_C Σ_k λ_k r_k(C)`, solved as
/// an LP. Returns the value and the mixing weights.
pub fn randomized_game_value<S: Scalar>(outcomes: &[PolicyOutcome<S>]) -> Result<(S, Vec<S>)> {
    let k = outcomes.len();
    let caps = outcomes.first().map_or(0, |o| o.ratios.len());
    if k == 0 || caps == 0 {
        return Err(Error::InvalidParameter("no policies or capacities to mix".into()));
    }
    // variables: λ_0..λ_{k−1}, v
    let mut poly = LinearPolytope::new(k + 1);
    for c in 0..caps {
        let mut terms: Vec<(usize, S)> = outcomes
            .iter()
            .enumerate()
            .map(|(j, o)| (j, -o.ratios[c].clone()))
            .collect();
        terms.push((k, S::one()));
        poly.add_constraint(&terms, S::zero())?;
    }
    let all: Vec<(usize, S)> = (0..k).map(|j| (j, S::one())).collect();
    poly.add_constraint(&all, S::one())?;
    let mut c = vec![S::zero(); k + 1];
    c[k] = S::one();
    let sol = lp_maximize(&poly, &c)?;
    let weights = sol.x[..k].to_vec();
    Ok((sol.value, weights))
}

/// Best worst-case ratio of a deterministic policy on `capacities`, and the
/// best worst-case ratio of an even mixture of a policy starting with
/// `first` and one starting elsewhere.
pub fn deterministic_and_half_mixture<S: Scalar>(
    inst: &Instance<S>,
    capacities: &[u64],
    first: usize,
) -> Result<(S, S)> {
    let frontier = policy_frontier(inst, capacities, true)?;
    let worst = |o: &PolicyOutcome<S>| o.ratios.iter().cloned().reduce(S::min_of).unwrap_or_else(S::one);
    let deterministic = frontier.iter().map(worst).reduce(S::max_of).unwrap_or_else(S::zero);
    let half = S::from_ratio(1, 2);
    let mut mixture = S::zero();
    for a in frontier.iter().filter(|o| o.tree.root_item() == Some(first)) {
        for b in frontier.iter().filter(|o| o.tree.root_item() != Some(first)) {
            mixture = S::max_of(mixture, mixture_worst_case(&a.ratios, &b.ratios, &half));
        }
    }
    Ok((deterministic, mixture))
}
