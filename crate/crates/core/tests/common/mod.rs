#![allow(dead_code)]

pub mod lemmas;

use submod_knapsack::instances::{generate_random, CapacityDistribution, Family, GeneratorSpec, Instance};
use submod_knapsack::stochastic::{preprocess, LinearPolytope};
use submod_knapsack::Scalar;

/// Random desk instance with a distribution satisfying the relaxation
/// preconditions (conditioned on `C ≥ s_min` when needed). Seeds whose
/// capacity never reaches `s_min` are skipped deterministically.
pub fn desk_instance(seed: u64, n: usize, size_max: u64, family: Family) -> (Instance<f64>, CapacityDistribution<f64>) {
    let spec = GeneratorSpec::new(n, 1, size_max, family).with_distribution(3);
    let (inst, pre) = (0..)
        .find_map(|k: u64| {
            let inst = generate_random::<f64>(&spec, seed.wrapping_add(k << 32)).unwrap();
            let dist = inst.distribution().unwrap().clone();
            preprocess(&inst, &dist, true).ok().map(|pre| (inst, pre))
        })
        .unwrap();
    let inst = Instance::new(inst.sizes(), inst.function().clone())
        .unwrap()
        .with_distribution(pre.distribution.clone())
        .unwrap();
    (inst, pre.distribution)
}

/// Largest `λ ≤ 1` with `λ·v` inside the polytope.
pub fn fit_into<S: Scalar>(poly: &LinearPolytope<S>, v: &[S]) -> Vec<S> {
    let mut lambda = S::one();
    for (row, b) in poly.rows().iter().zip(poly.rhs()) {
        let load = row.iter().zip(v).fold(S::zero(), |a, (r, x)| a + r.clone() * x.clone());
        if load > S::zero() {
            let ratio = b.clone() / load;
            if ratio < lambda {
                lambda = ratio;
            }
        }
    }
    v.iter().map(|x| x.clone() * lambda.clone()).collect()
}

/// Cheap deterministic pseudo-random values in `[0, 1)`.
pub fn noise(seed: u64, len: usize) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}
