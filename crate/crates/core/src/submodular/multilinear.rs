use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::function::SetFunction;
use super::set::ItemSet;

/// Largest ground set for exact multilinear evaluation.
pub const MULTILINEAR_EXACT_LIMIT: usize = 16;

/// Point of `[0,1]^n`; also the sampler for the random set `R_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalVector<S> {
    x: Vec<S>,
}

impl<S: Scalar> FractionalVector<S> {
    pub fn new(x: Vec<S>) -> Result<Self> {
        if let Some(i) = x.iter().position(|v| *v < S::zero() || *v > S::one()) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} = {} lies outside [0, 1]",
                x[i].render()
            )));
        }
        Ok(FractionalVector { x })
    }

    /// Clamps float noise into `[0,1]` instead of rejecting it.
    pub fn clamped(x: Vec<S>) -> Self {
        let x = x
            .into_iter()
            .map(|v| S::min_of(S::one(), S::max_of(S::zero(), v)))
            .collect();
        FractionalVector { x }
    }

    pub fn zeros(n: usize) -> Self {
        FractionalVector {
            x: vec![S::zero(); n],
        }
    }

    pub fn indicator(n: usize, set: ItemSet) -> Self {
        FractionalVector {
            x: (0..n)
                .map(|i| if set.contains(i) { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<S> {
        self.x
    }

    /// Draws `R_x`: each `i` independently with probability `x_i`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ItemSet {
        let mut set = ItemSet::EMPTY;
        for (i, v) in self.x.iter().enumerate() {
            let p = v.to_f64_lossy();
            if p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p) {
                set.insert(i);
            }
        }
        set
    }
}

fn check_dims<S: Scalar, F: SetFunction<S> + ?Sized>(f: &F, x: &FractionalVector<S>) -> Result<usize> {
    let n = f.ground_size();
    if x.len() != n {
        return Err(Error::InvalidParameter(format!(
            "vector has {} coordinates for a ground set of {n}",
            x.len()
        )));
    }
    if n > MULTILINEAR_EXACT_LIMIT {
        return Err(Error::Capability {
            what: "exact multilinear extension (use the Monte-Carlo estimator)",
            size: n,
            limit: MULTILINEAR_EXACT_LIMIT,
        });
    }
    Ok(n)
}

/// `Pr[R_x = X]` for every bitmask `X`, built by doubling.
pub fn subset_probabilities<S: Scalar>(x: &[S]) -> Vec<S> {
    let mut probs = Vec::with_capacity(1 << x.len());
    probs.push(S::one());
    for xi in x {
        let len = probs.len();
        let q = S::one() - xi.clone();
        for m in 0..len {
            let p = probs[m].clone();
            probs.push(p.clone() * xi.clone());
            probs[m] = p * q.clone();
        }
    }
    probs
}

/// `Σ_X values[X] · Pr[R_x = X]` for a precomputed subset-value table.
pub fn multilinear_from_values<S: Scalar>(values: &[S], x: &[S]) -> S {
    debug_assert_eq!(values.len(), 1 << x.len());
    subset_probabilities(x)
        .into_iter()
        .zip(values)
        .filter(|(p, _)| !p.is_zero())
        .fold(S::zero(), |acc, (p, v)| acc + p * v.clone())
}

/// Gradient of the multilinear extension from a subset-value table:
/// `∂F/∂x_i = E[f(R ∪ {i}) − f(R ∖ {i})]` with `R` drawn on the other coordinates.
pub fn gradient_from_values<S: Scalar>(values: &[S], x: &[S]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut others = x.to_vec();
            others.remove(i);
            let probs = subset_probabilities(&others);
            let low = (1usize << i) - 1;
            probs
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .fold(S::zero(), |acc, (m, p)| {
                    // reinsert a zero bit at position i
                    let base = (m & low) | ((m & !low) << 1);
                    let gain = values[base | 1 << i].clone() - values[base].clone();
                    acc + p.clone() * gain
                })
        })
        .collect()
}

/// Exact `F(x) = E[f(R_x)]` by full subset enumeration.
pub fn multilinear_exact<S: Scalar, F: SetFunction<S> + ?Sized>(f: &F, x: &FractionalVector<S>) -> Result<S> {
    let n = check_dims(f, x)?;
    let values: Vec<S> = (0..1u64 << n).map(|m| f.value(ItemSet(m))).collect();
    Ok(multilinear_from_values(&values, x.as_slice()))
}

/// Monte-Carlo estimate of `F(x)` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn estimate(self) -> McEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: self.count,
        }
    }
}

/// Per-task generator: one seed, one stream per task.
pub(crate) fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Sample mean of `f(R_x)`; reproducible per seed.
pub fn multilinear_mc<S: Scalar, F: SetFunction<S> + ?Sized>(
    f: &F,
    x: &FractionalVector<S>,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    multilinear_mc_parallel(f, x, samples, seed, 1)
}

/// Parallel estimator: `samples` are split over `tasks` tasks, each drawing
/// from its own stream of `seed`. Results depend only on
/// `(seed, samples, tasks)`.
pub fn multilinear_mc_parallel<S: Scalar, F: SetFunction<S> + ?Sized>(
    f: &F,
    x: &FractionalVector<S>,
    samples: u64,
    seed: u64,
    tasks: u64,
) -> Result<McEstimate> {
    if samples == 0 || tasks == 0 {
        return Err(Error::InvalidParameter(
            "samples and tasks must be at least 1".into(),
        ));
    }
    if x.len() != f.ground_size() {
        return Err(Error::InvalidParameter(format!(
            "vector has {} coordinates for a ground set of {}",
            x.len(),
            f.ground_size()
        )));
    }
    let per_task: Vec<Moments> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let count = samples / tasks + u64::from(task < samples % tasks);
            let mut rng = task_rng(seed, task);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(f.value(x.sample(&mut rng)).to_f64_lossy());
            }
            m
        })
        .collect();
    Ok(per_task
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// How partial derivatives of `F` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum GradientMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// `∂F/∂x_i` for every coordinate.
pub fn multilinear_gradient<S: Scalar, F: SetFunction<S> + ?Sized>(
    f: &F,
    x: &FractionalVector<S>,
    mode: GradientMode,
) -> Result<Vec<S>> {
    match mode {
        GradientMode::Exact => {
            let n = check_dims(f, x)?;
            let values: Vec<S> = (0..1u64 << n).map(|m| f.value(ItemSet(m))).collect();
            Ok(gradient_from_values(&values, x.as_slice()))
        }
        GradientMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("samples must be at least 1".into()));
            }
            let n = f.ground_size();
            let mut rng = task_rng(seed, 0);
            let mut acc = vec![0.0f64; n];
            for _ in 0..samples {
                let r = x.sample(&mut rng);
                for (i, a) in acc.iter_mut().enumerate() {
                    let hi = f.value(r.with(i)).to_f64_lossy();
                    let lo = f.value(r.without(i)).to_f64_lossy();
                    *a += hi - lo;
                }
            }
            Ok(acc
                .into_iter()
                .map(|a| S::from_f64_lossy(a / samples as f64))
                .collect())
        }
    }
}
