use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::submodular::{ItemSet, SetFunction, SubmodularFunction};

/// An item with a positive integer size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Item {
    pub size: u64,
}

/// Items, a monotone submodular objective over them and an optional
/// capacity distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    items: Vec<Item>,
    f: SubmodularFunction<S>,
    total: u64,
    distribution: Option<CapacityDistribution<S>>,
}

impl<S: Scalar> Instance<S> {
    pub fn new(sizes: Vec<u64>, f: SubmodularFunction<S>) -> Result<Self> {
        if sizes.len() != f.ground_size() {
            return Err(Error::InvalidParameter(format!(
                "{} items but the function has a ground set of {}",
                sizes.len(),
                f.ground_size()
            )));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!("item {i} has size 0")));
        }
        let total = sizes
            .iter()
            .try_fold(0u64, |acc, &s| acc.checked_add(s))
            .ok_or_else(|| Error::InvalidParameter("total size overflows u64".into()))?;
        Ok(Instance {
            items: sizes.into_iter().map(|size| Item { size }).collect(),
            f,
            total,
            distribution: None,
        })
    }

    /// Attaches a capacity distribution over `0..=T`.
    pub fn with_distribution(mut self, dist: CapacityDistribution<S>) -> Result<Self> {
        if dist.horizon() != self.total {
            return Err(Error::InvalidParameter(format!(
                "distribution is over 0..={} but the total size is {}",
                dist.horizon(),
                self.total
            )));
        }
        self.distribution = Some(dist);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn size(&self, i: usize) -> u64 {
        self.items[i].size
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.items.iter().map(|it| it.size).collect()
    }

    pub fn function(&self) -> &SubmodularFunction<S> {
        &self.f
    }

    /// `T = Σ_i s(i)`.
    pub fn total_size(&self) -> u64 {
        self.total
    }

    pub fn distribution(&self) -> Option<&CapacityDistribution<S>> {
        self.distribution.as_ref()
    }

    pub fn require_distribution(&self) -> Result<&CapacityDistribution<S>> {
        self.distribution
            .as_ref()
            .ok_or_else(|| Error::Precondition("instance has no capacity distribution".into()))
    }

    /// `s(X)`.
    pub fn set_size(&self, set: ItemSet) -> u64 {
        set.iter().map(|i| self.items[i].size).sum()
    }

    pub fn value(&self, set: ItemSet) -> S {
        self.f.value(set)
    }

    pub fn singleton_value(&self, i: usize) -> S {
        self.f.value(ItemSet::singleton(i))
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.n())
    }

    pub fn min_size(&self) -> Option<u64> {
        self.items.iter().map(|it| it.size).min()
    }

    /// Same instance in another scalar type.
    pub fn convert<T: Scalar>(&self) -> Instance<T> {
        Instance {
            items: self.items.clone(),
            f: self.f.convert(),
            total: self.total,
            distribution: self.distribution.as_ref().map(CapacityDistribution::convert),
        }
    }

    /// Restriction to the items of `keep`, reindexed in ascending order and
    /// kept in the same function family.
    /// The distribution is dropped since its horizon no longer matches.
    pub fn restrict(&self, keep: ItemSet) -> Result<Instance<S>>
    where
        S: Scalar,
    {
        let idx = keep.to_vec();
        let pick = |v: &[S]| idx.iter().map(|&i| v[i].clone()).collect::<Vec<S>>();
        let f = match &self.f {
            SubmodularFunction::Modular { weights } => SubmodularFunction::modular(pick(weights))?,
            SubmodularFunction::ConcaveOfModular { weights, map } => {
                SubmodularFunction::concave_of_modular(pick(weights), map.clone())?
            }
            SubmodularFunction::Coverage { element_weights, covers } => SubmodularFunction::coverage(
                element_weights.clone(),
                idx.iter().map(|&i| covers[i].clone()).collect(),
            )?,
            SubmodularFunction::Table { .. } => {
                let m = idx.len();
                let values: Vec<S> = (0..1u64 << m)
                    .map(|mask| {
                        let set: ItemSet = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| idx[b]).collect();
                        self.f.value(set)
                    })
                    .collect();
                SubmodularFunction::table_unverified(values)?
            }
        };
        Instance::new(idx.iter().map(|&i| self.items[i].size).collect(), f)
    }
}

impl<S: Scalar> SetFunction<S> for Instance<S> {
    fn ground_size(&self) -> usize {
        self.n()
    }

    fn value(&self, set: ItemSet) -> S {
        self.f.value(set)
    }
}

/// How load and construction treat a probability vector whose sum misses 1
/// by more than `1e-12`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Reject,
    Renormalize,
}

/// Probability mass `p(t)` for `t ∈ {0, …, T}` with cached suffix sums.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityDistribution<S> {
    p: Vec<S>,
    suffix: Vec<S>,
}

/// Slack on `Σ p(t) = 1` before rejecting or renormalizing.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

impl<S: Scalar> CapacityDistribution<S> {
    /// `p[t]` for `t = 0..=T`.
    pub fn new(p: Vec<S>, normalization: Normalization) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("distribution needs at least one point".into()));
        }
        if let Some(t) = p.iter().position(|v| *v < S::zero()) {
            return Err(Error::InvalidParameter(format!("p({t}) is negative")));
        }
        let sum = p.iter().fold(S::zero(), |a, v| a + v.clone());
        let off = (sum.to_f64_lossy() - 1.0).abs();
        let p = if off <= PROBABILITY_SUM_TOLERANCE {
            p
        } else {
            match normalization {
                Normalization::Reject => {
                    return Err(Error::InvalidParameter(format!(
                        "probabilities sum to {} instead of 1",
                        sum.render()
                    )))
                }
                Normalization::Renormalize => {
                    if sum.is_zero() {
                        return Err(Error::InvalidParameter("probabilities sum to 0".into()));
                    }
                    p.into_iter().map(|v| v / sum.clone()).collect()
                }
            }
        };
        let mut suffix = vec![S::zero(); p.len() + 1];
        for t in (0..p.len()).rev() {
            suffix[t] = suffix[t + 1].clone() + p[t].clone();
        }
        Ok(CapacityDistribution { p, suffix })
    }

    pub fn point_mass(horizon: u64, at: u64) -> Result<Self> {
        if at > horizon {
            return Err(Error::InvalidParameter(format!(
                "point mass at {at} lies beyond the horizon {horizon}"
            )));
        }
        let mut p = vec![S::zero(); horizon as usize + 1];
        p[at as usize] = S::one();
        Self::new(p, Normalization::Reject)
    }

    /// Sparse constructor from `(t, p(t))` pairs.
    pub fn from_points(horizon: u64, points: &[(u64, S)], normalization: Normalization) -> Result<Self> {
        let mut p = vec![S::zero(); horizon as usize + 1];
        for (t, v) in points {
            if *t > horizon {
                return Err(Error::InvalidParameter(format!(
                    "support point {t} lies beyond the horizon {horizon}"
                )));
            }
            p[*t as usize] = p[*t as usize].clone() + v.clone();
        }
        Self::new(p, normalization)
    }

    /// `T`.
    pub fn horizon(&self) -> u64 {
        (self.p.len() - 1) as u64
    }

    pub fn p(&self, t: u64) -> S {
        self.p.get(t as usize).cloned().unwrap_or_else(S::zero)
    }

    pub fn probabilities(&self) -> &[S] {
        &self.p
    }

    /// Points with positive probability, ascending.
    pub fn support(&self) -> impl Iterator<Item = (u64, &S)> + '_ {
        self.p
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > S::zero())
            .map(|(t, v)| (t as u64, v))
    }

    /// `Σ_{t' ≥ t} p(t')` for `0 ≤ t ≤ T+1`.
    pub fn tail(&self, t: u64) -> Result<S> {
        self.suffix
            .get(t as usize)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!(
                "tail queried at {t} beyond T+1 = {}",
                self.p.len()
            )))
    }

    /// `p̄(t) = Σ_{t' > t} p(t')`, zero for `t ≥ T`.
    pub fn pbar(&self, t: u64) -> S {
        self.suffix
            .get(t as usize + 1)
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn convert<T: Scalar>(&self) -> CapacityDistribution<T> {
        let p = self
            .p
            .iter()
            .map(|v| T::parse_scalar(&v.render()).unwrap_or_else(|| T::from_f64_lossy(v.to_f64_lossy())))
            .collect();
        CapacityDistribution::new(p, Normalization::Renormalize).expect("converted distribution is valid")
    }

    /// Distribution of `C` conditioned on `C ≥ threshold`, with the
    /// conditioning probability `Pr[C ≥ threshold]`.
    pub fn condition_at_least(&self, threshold: u64) -> Result<(Self, S)> {
        let mass = self.tail(threshold.min(self.horizon() + 1))?;
        if mass.is_zero() {
            return Err(Error::Precondition(format!(
                "no capacity mass at or above {threshold}"
            )));
        }
        let p = self
            .p
            .iter()
            .enumerate()
            .map(|(t, v)| if (t as u64) < threshold { S::zero() } else { v.clone() / mass.clone() })
            .collect();
        Ok((Self::new(p, Normalization::Renormalize)?, mass))
    }
}
