use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::submodular::{ConcaveMap, SubmodularFunction, MAX_ITEMS};

use super::model::{CapacityDistribution, Instance, Normalization};

/// Function family drawn by [`generate_random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Modular,
    Coverage,
    ConcaveSqrt,
    ConcavePiecewise,
    /// One of the above, chosen per instance.
    Mixed,
}

/// Parameters for random instances. All weights are small integers so the
/// same instance is representable exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub size_min: u64,
    pub size_max: u64,
    pub family: Family,
    /// Attach a random capacity distribution over `0..=T`.
    pub with_distribution: bool,
    /// Number of support points of the distribution (at most `T + 1`).
    pub support: usize,
}

impl GeneratorSpec {
    pub fn new(n: usize, size_min: u64, size_max: u64, family: Family) -> Self {
        GeneratorSpec {
            n,
            size_min,
            size_max,
            family,
            with_distribution: false,
            support: 3,
        }
    }

    pub fn with_distribution(mut self, support: usize) -> Self {
        self.with_distribution = true;
        self.support = support;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "item count {} outside 1..={MAX_ITEMS}",
                self.n
            )));
        }
        if self.size_min == 0 || self.size_min > self.size_max {
            return Err(Error::InvalidParameter(format!(
                "size range {}..={} is empty or contains 0",
                self.size_min, self.size_max
            )));
        }
        if self.with_distribution && self.support == 0 {
            return Err(Error::InvalidParameter("distribution support must be nonempty".into()));
        }
        Ok(())
    }
}

fn weights<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, hi: i64) -> Vec<S> {
    (0..n).map(|_| S::from_int(rng.random_range(1..=hi))).collect()
}

fn draw_function<S: Scalar>(rng: &mut ChaCha8Rng, family: Family, n: usize) -> Result<SubmodularFunction<S>> {
    let family = match family {
        Family::Mixed => [
            Family::Modular,
            Family::Coverage,
            Family::ConcaveSqrt,
            Family::ConcavePiecewise,
        ][rng.random_range(0..4)],
        other => other,
    };
    match family {
        Family::Modular => SubmodularFunction::modular(weights(rng, n, 10)),
        Family::Coverage => {
            let universe = (2 * n).max(3);
            let covers = (0..n)
                .map(|_| {
                    let k = rng.random_range(1..=3usize.min(universe));
                    let mut c = sample(rng, universe, k).into_vec();
                    c.sort_unstable();
                    c
                })
                .collect();
            SubmodularFunction::coverage(weights(rng, universe, 5), covers)
        }
        Family::ConcaveSqrt => SubmodularFunction::concave_of_modular(weights(rng, n, 10), ConcaveMap::Sqrt),
        Family::ConcavePiecewise => {
            let w: Vec<S> = weights(rng, n, 10);
            let pieces = rng.random_range(1..=3usize);
            let mut knots = Vec::with_capacity(pieces);
            let mut at = 0i64;
            for _ in 0..pieces {
                at += rng.random_range(2..=8i64);
                knots.push(S::from_int(at));
            }
            let mut slopes = Vec::with_capacity(pieces + 1);
            let mut slope = rng.random_range(4..=8i64);
            for _ in 0..=pieces {
                slopes.push(S::from_int(slope));
                slope = rng.random_range(0..=slope);
            }
            SubmodularFunction::concave_of_modular(w, ConcaveMap::PiecewiseLinear { knots, slopes })
        }
        Family::Mixed => unreachable!(),
    }
}

/// Random instance, reproducible per `(spec, seed)`.
pub fn generate_random<S: Scalar>(spec: &GeneratorSpec, seed: u64) -> Result<Instance<S>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<u64> = (0..spec.n)
        .map(|_| rng.random_range(spec.size_min..=spec.size_max))
        .collect();
    let f = draw_function::<S>(&mut rng, spec.family, spec.n)?;
    let inst = Instance::new(sizes, f)?;
    if !spec.with_distribution {
        return Ok(inst);
    }
    let horizon = inst.total_size();
    let k = spec.support.min(horizon as usize + 1);
    let points: Vec<(u64, S)> = sample(&mut rng, horizon as usize + 1, k)
        .into_iter()
        .map(|t| (t as u64, S::from_int(rng.random_range(1..=10))))
        .collect();
    let dist = CapacityDistribution::from_points(horizon, &points, Normalization::Renormalize)?;
    inst.with_distribution(dist)
}
