use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{CapacityDistribution, Instance, Normalization};
use crate::oracle::smpsc_expected_value;
use crate::policies::UniversalSequence;
use crate::scalar::Scalar;
use crate::submodular::{task_rng, ItemSet};

use super::breakpoints::{build_compact_relaxation, full_mass_at_least, BreakpointStructure, CompactObjective, CompactSolution};
use super::extension::{Extension, ExtensionMode};
use super::greedy::{continuous_greedy, GreedyReport, GreedyRun, DEFAULT_STEPS};
use super::lp::LinearPolytope;
use super::relaxation::{build_full_relaxation, FullObjective, TimeIndexedSolution};
use super::rounding::{round_solution, Rounding, SurvivalRule};

/// Instance after removing zero-value items, folding the distribution onto
/// the horizon `T = Σ s(i)` of the remaining items and, when permitted,
/// conditioning on `C ≥ min_i s(i)`.
#[derive(Clone, Debug)]
pub struct Preprocessed<S> {
    pub instance: Instance<S>,
    pub distribution: CapacityDistribution<S>,
    /// Original index of each remaining item.
    pub kept: Vec<usize>,
    /// Original indices of the removed zero-value items.
    pub removed: Vec<usize>,
    /// Original item count.
    pub original_n: usize,
    /// Mass moved down onto the new horizon.
    pub folded_mass: S,
    /// `Pr[C ≥ s_min]` when the distribution was conditioned.
    pub conditioned_mass: Option<S>,
}

impl<S: Scalar> Preprocessed<S> {
    /// Maps an order over the remaining items back to original indices and
    /// appends the removed items.
    pub fn lift(&self, order: &[usize]) -> Result<UniversalSequence> {
        let mut full: Vec<usize> = order.iter().map(|&i| self.kept[i]).collect();
        full.extend(&self.removed);
        UniversalSequence::new(full, self.original_n)
    }
}

/// Prepares an instance for the relaxation pipelines.
pub fn preprocess<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    permissive: bool,
) -> Result<Preprocessed<S>> {
    let n = inst.n();
    let (kept, removed): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| inst.singleton_value(i) > S::zero());
    let instance = if removed.is_empty() {
        Instance::new(inst.sizes(), inst.function().clone())?
    } else {
        inst.restrict(kept.iter().copied().collect::<ItemSet>())?
    };
    let horizon = instance.total_size();
    let mut p = vec![S::zero(); horizon as usize + 1];
    let mut folded_mass = S::zero();
    for (t, v) in dist.support() {
        if t >= horizon {
            p[horizon as usize] = p[horizon as usize].clone() + v.clone();
            if t > horizon {
                folded_mass = folded_mass + v.clone();
            }
        } else {
            p[t as usize] = v.clone();
        }
    }
    let mut distribution = CapacityDistribution::new(p, Normalization::Renormalize)?;
    let mut conditioned_mass = None;
    if let Some(s_min) = instance.min_size() {
        if !full_mass_at_least(&distribution, s_min)? {
            if !permissive {
                return Err(Error::Precondition(format!(
                    "Pr[C ≥ {s_min}] = {} is not 1; pass the permissive flag to condition on C ≥ {s_min}",
                    distribution.tail(s_min)?.render()
                )));
            }
            let (conditioned, mass) = distribution.condition_at_least(s_min)?;
            distribution = conditioned;
            conditioned_mass = Some(mass);
        }
    }
    Ok(Preprocessed {
        instance,
        distribution,
        kept,
        removed,
        original_n: n,
        folded_mass,
        conditioned_mass,
    })
}

/// Settings of the compact sequence algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alg5Config {
    pub epsilon: f64,
    pub steps: usize,
    /// Continuous-greedy stopping time.
    pub stopping_time: f64,
    /// Block `k` is chosen with probability `sampling_scale · y_{ki}`.
    pub sampling_scale: f64,
    /// Condition on `C ≥ s_min` instead of rejecting.
    pub permissive: bool,
    /// Seed for Monte-Carlo gradients on large ground sets.
    pub gradient_seed: u64,
}

impl Default for Alg5Config {
    fn default() -> Self {
        Alg5Config {
            epsilon: 0.1,
            steps: DEFAULT_STEPS,
            stopping_time: 0.25,
            sampling_scale: 0.5,
            permissive: false,
            gradient_seed: 0,
        }
    }
}

impl Alg5Config {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.sampling_scale > 0.0 && self.sampling_scale <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling scale {} must lie in (0, 1]",
                self.sampling_scale
            )));
        }
        Ok(())
    }
}

/// Size of a constraint system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpStats {
    pub variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
    pub pivots: usize,
}

impl LpStats {
    fn of<S: Scalar>(poly: &LinearPolytope<S>, pivots: usize) -> Self {
        LpStats {
            variables: poly.dim(),
            constraints: poly.num_constraints(),
            nonzeros: poly.nonzeros(),
            pivots,
        }
    }
}

/// Everything of the compact algorithm that does not depend on the seed.
#[derive(Clone, Debug)]
pub struct Alg5Prepared<S> {
    pub config: Alg5Config,
    pub pre: Preprocessed<S>,
    pub breakpoints: Option<BreakpointStructure>,
    pub run: Option<GreedyRun<S>>,
    pub y: Option<CompactSolution<S>>,
    pub lp: Option<LpStats>,
}

/// Breakpoints and continuous greedy on the compact relaxation.
pub fn prepare_algorithm5<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    config: &Alg5Config,
) -> Result<Alg5Prepared<S>> {
    config.validate()?;
    let pre = preprocess(inst, dist, config.permissive)?;
    if pre.instance.n() == 0 {
        return Ok(Alg5Prepared {
            config: *config,
            pre,
            breakpoints: None,
            run: None,
            y: None,
            lp: None,
        });
    }
    let (bp, poly) = build_compact_relaxation(&pre.instance, &pre.distribution, config.epsilon)?;
    let ext = Extension::new(
        pre.instance.function(),
        ExtensionMode::auto(pre.instance.n(), config.gradient_seed),
    )?;
    let objective = CompactObjective::new(&ext, &bp, &pre.distribution);
    let run = continuous_greedy(&objective, &poly, &S::from_f64_lossy(config.stopping_time), config.steps)?;
    let y = CompactSolution::new(&bp, clamp_nonnegative(&run.point))?;
    let lp = LpStats::of(&poly, run.pivots);
    Ok(Alg5Prepared {
        config: *config,
        pre,
        breakpoints: Some(bp),
        run: Some(run),
        y: Some(y),
        lp: Some(lp),
    })
}

fn clamp_nonnegative<S: Scalar>(v: &[S]) -> Vec<S> {
    v.iter().map(|x| S::max_of(x.clone(), S::zero())).collect()
}

/// One draw of the compact algorithm, in original item indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alg5Draw {
    /// Chosen block and start time; `None` for items discarded in sampling.
    pub starts: Vec<Option<(usize, u64)>>,
    /// Items removed by the prefix filter.
    pub filtered: Vec<usize>,
    pub sequence: UniversalSequence,
}

impl<S: Scalar> Alg5Prepared<S> {
    /// Samples starts block by block and filters the sorted order: `Π′_i`
    /// stays iff the sizes of all earlier `Π′_j` sum to less than its start.
    pub fn sample(&self, seed: u64) -> Result<Alg5Draw> {
        let original_n = self.pre.original_n;
        let mut starts = vec![None; original_n];
        let (Some(bp), Some(y)) = (&self.breakpoints, &self.y) else {
            return Ok(Alg5Draw {
                starts,
                filtered: Vec::new(),
                sequence: self.pre.lift(&[])?,
            });
        };
        let n = bp.n();
        let scale = self.config.sampling_scale;
        let mut rng = task_rng(seed, 0);
        let mut local: Vec<Option<(usize, u64)>> = vec![None; n];
        for (i, slot) in local.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for k in 0..bp.blocks() {
                acc += scale * y.get(k, i).to_f64_lossy();
                if u < acc {
                    let (lo, hi) = bp.block(k);
                    *slot = Some((k, rng.random_range(lo..hi)));
                    break;
                }
            }
        }
        let mut sorted: Vec<usize> = (0..n).filter(|&i| local[i].is_some()).collect();
        sorted.sort_by_key(|&i| (local[i].map(|(_, t)| t), i));
        let mut order = Vec::with_capacity(n);
        let mut filtered = Vec::new();
        let mut prefix = 0u64;
        for (pos, &i) in sorted.iter().enumerate() {
            let (_, t) = local[i].expect("sorted items have starts");
            if pos == 0 || prefix < t {
                order.push(i);
            } else {
                filtered.push(i);
            }
            prefix += bp.sizes[i];
        }
        let mut leftovers: Vec<usize> = (0..n).filter(|&i| local[i].is_none()).chain(filtered.iter().copied()).collect();
        leftovers.sort_unstable();
        order.extend(leftovers);
        for (i, s) in local.iter().enumerate() {
            starts[self.pre.kept[i]] = *s;
        }
        Ok(Alg5Draw {
            starts,
            filtered: filtered.iter().map(|&i| self.pre.kept[i]).collect(),
            sequence: self.pre.lift(&order)?,
        })
    }

    /// `θ` of the continuous-greedy point.
    pub fn theta(&self) -> Option<S> {
        self.run.as_ref().map(|r| r.value().clone())
    }
}

/// Mean and spread of achieved values over seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSweep {
    pub seeds: u64,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl SeedSweep {
    pub fn from_values(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        SeedSweep {
            seeds: values.len() as u64,
            mean,
            stderr: (var / m).sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Achieved `E_C[f(Π(C))]` of the compact algorithm for seeds
/// `first..first+count`, evaluated exactly over the support.
pub fn sweep_algorithm5<S: Scalar>(
    prepared: &Alg5Prepared<S>,
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    first: u64,
    count: u64,
) -> Result<SeedSweep> {
    if count == 0 {
        return Err(Error::InvalidParameter("a sweep needs at least one seed".into()));
    }
    let values = (first..first + count)
        .into_par_iter()
        .map(|seed| {
            let draw = prepared.sample(seed)?;
            Ok(smpsc_expected_value(&draw.sequence, inst, dist).to_f64_lossy())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SeedSweep::from_values(&values))
}

/// Report of one end-to-end run of the compact algorithm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alg5Report {
    pub config: Alg5Config,
    pub seed: u64,
    pub removed_items: Vec<usize>,
    pub folded_mass: f64,
    pub conditioned_mass: Option<f64>,
    pub breakpoints: Option<BreakpointStructure>,
    pub lp: Option<LpStats>,
    pub greedy: Option<GreedyReport>,
    pub draw: Alg5Draw,
    pub sequence: UniversalSequence,
    pub expected_value: f64,
}

impl<S: Scalar> Alg5Prepared<S> {
    pub fn report(
        &self,
        inst: &Instance<S>,
        dist: &CapacityDistribution<S>,
        seed: u64,
    ) -> Result<Alg5Report> {
        let draw = self.sample(seed)?;
        let expected_value = smpsc_expected_value(&draw.sequence, inst, dist).to_f64_lossy();
        Ok(Alg5Report {
            config: self.config,
            seed,
            removed_items: self.pre.removed.clone(),
            folded_mass: self.pre.folded_mass.to_f64_lossy(),
            conditioned_mass: self.pre.conditioned_mass.as_ref().map(Scalar::to_f64_lossy),
            breakpoints: self.breakpoints.clone(),
            lp: self.lp.clone(),
            greedy: self.run.as_ref().map(GreedyRun::report),
            sequence: draw.sequence.clone(),
            draw,
            expected_value,
        })
    }
}

/// The compact sequence algorithm end to end for one seed.
pub fn algorithm5<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    config: &Alg5Config,
    seed: u64,
) -> Result<UniversalSequence> {
    Ok(prepare_algorithm5(inst, dist, config)?.sample(seed)?.sequence)
}

/// Settings of the pseudo-polynomial pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PseudoConfig {
    pub steps: usize,
    pub stopping_time: f64,
    pub rule: SurvivalRule,
    pub permissive: bool,
    pub gradient_seed: u64,
    /// Also run continuous greedy with stopping time 1 for the report.
    pub fractional: bool,
}

impl Default for PseudoConfig {
    fn default() -> Self {
        PseudoConfig {
            steps: DEFAULT_STEPS,
            stopping_time: 0.25,
            rule: SurvivalRule::Corrected,
            permissive: false,
            gradient_seed: 0,
            fractional: true,
        }
    }
}

/// Seed-independent part of the pseudo-polynomial pipeline.
#[derive(Clone, Debug)]
pub struct PseudoPrepared<S> {
    pub config: PseudoConfig,
    pub pre: Preprocessed<S>,
    /// Continuous-greedy point `v` with `4v` feasible (for stopping time 1/4).
    pub point: Option<TimeIndexedSolution<S>>,
    pub run: Option<GreedyRun<S>>,
    /// Continuous greedy with stopping time 1.
    pub fractional: Option<GreedyRun<S>>,
    pub lp: Option<LpStats>,
}

/// Continuous greedy on the time-indexed relaxation.
pub fn prepare_pseudopoly<S: Scalar>(
    inst: &Instance<S>,
    dist: &CapacityDistribution<S>,
    config: &PseudoConfig,
) -> Result<PseudoPrepared<S>> {
    let pre = preprocess(inst, dist, config.permissive)?;
    if pre.instance.n() == 0 {
        return Ok(PseudoPrepared {
            config: *config,
            pre,
            point: None,
            run: None,
            fractional: None,
            lp: None,
        });
    }
    let poly = build_full_relaxation(&pre.instance, &pre.distribution)?;
    let ext = Extension::new(
        pre.instance.function(),
        ExtensionMode::auto(pre.instance.n(), config.gradient_seed),
    )?;
    let objective = FullObjective::new(&ext, pre.instance.sizes(), &pre.distribution);
    let run = continuous_greedy(&objective, &poly, &S::from_f64_lossy(config.stopping_time), config.steps)?;
    let fractional = if config.fractional {
        Some(continuous_greedy(&objective, &poly, &S::one(), config.steps)?)
    } else {
        None
    };
    let point = TimeIndexedSolution::new(
        pre.distribution.horizon(),
        pre.instance.sizes(),
        clamp_nonnegative(&run.point),
    )?;
    let pivots = run.pivots + fractional.as_ref().map_or(0, |r| r.pivots);
    Ok(PseudoPrepared {
        config: *config,
        lp: Some(LpStats::of(&poly, pivots)),
        pre,
        point: Some(point),
        run: Some(run),
        fractional,
    })
}

impl<S: Scalar> PseudoPrepared<S> {
    /// Rounds the stored point. The point is passed as already scaled when
    /// the stopping time is 1/4; otherwise the rounding applies its own 1/4.
    pub fn sample(&self, seed: u64) -> Result<(Rounding, UniversalSequence)> {
        let Some(point) = &self.point else {
            let seq = self.pre.lift(&[])?;
            return Ok((
                Rounding {
                    times: Vec::new(),
                    kept: Vec::new(),
                    sequence: UniversalSequence::identity(0),
                },
                seq,
            ));
        };
        let already_scaled = self.config.stopping_time <= 0.25;
        let rounding = round_solution(point, &self.pre.instance, already_scaled, self.config.rule, seed)?;
        let seq = self.pre.lift(rounding.sequence.as_slice())?;
        Ok((rounding, seq))
    }
}
