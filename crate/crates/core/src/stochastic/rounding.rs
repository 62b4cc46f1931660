use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::policies::UniversalSequence;
use crate::scalar::Scalar;
use crate::submodular::task_rng;

use super::conversion::time_indexed_violation;
use super::relaxation::TimeIndexedSolution;

/// Smallest trial count accepted by [`crs_verify`].
pub const CRS_MIN_TRIALS: u64 = 10_000;

/// Independent streams the trials of [`crs_verify`] are split over; fixed so
/// results do not depend on the thread count.
const CRS_TASKS: u64 = 64;

/// Second-round discard rule and the matching capacity window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalRule {
    /// As written: `J_i` includes `i`, discard when `s(J_i) ≥ t_i`, and `i`
    /// counts at capacity `t` when `t_i ≤ t − s(i) − 1`.
    #[default]
    Inclusive,
    /// Discard when `s(J_i ∖ {i}) > t_i`; `i` counts at capacity `t` when
    /// `t_i ≤ t − s(i)`.
    Corrected,
}

impl SurvivalRule {
    /// Whether an item of size `s` started at `t_i` counts at capacity `t`.
    pub fn in_window(self, t_i: u64, s: u64, t: u64) -> bool {
        match self {
            SurvivalRule::Inclusive => t_i + s < t,
            SurvivalRule::Corrected => t_i + s <= t,
        }
    }

    /// Last start time inside the window, if any.
    pub fn window_end(self, s: u64, t: u64) -> Option<u64> {
        match self {
            SurvivalRule::Inclusive => t.checked_sub(s + 1),
            SurvivalRule::Corrected => t.checked_sub(s),
        }
    }

    /// `load` is `s(J_i)` including `i` itself.
    fn survives(self, load: u64, own: u64, t_i: u64) -> bool {
        match self {
            SurvivalRule::Inclusive => load < t_i,
            SurvivalRule::Corrected => load - own <= t_i,
        }
    }
}

/// Second round: `kept[i]` for each item with a first-round time.
pub fn second_round(sizes: &[u64], times: &[Option<u64>], rule: SurvivalRule) -> Vec<bool> {
    times
        .iter()
        .enumerate()
        .map(|(i, ti)| {
            let Some(ti) = *ti else { return false };
            let load: u64 = times
                .iter()
                .zip(sizes)
                .filter(|(tj, _)| tj.is_some_and(|tj| tj <= ti))
                .map(|(_, &s)| s)
                .sum();
            rule.survives(load, sizes[i], ti)
        })
        .collect()
}

/// Survivors by ascending `(t_i, i)`, then every other item by index.
pub fn order_by_times(times: &[Option<u64>], kept: &[bool]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..times.len()).filter(|&i| kept[i]).collect();
    order.sort_by_key(|&i| (times[i], i));
    order.extend((0..times.len()).filter(|&i| !kept[i]));
    order
}

/// Per-item first-round sampler over start times.
#[derive(Clone, Debug)]
pub struct StartSampler {
    /// `(t, cumulative probability)` over the support of each item.
    cumulative: Vec<Vec<(u64, f64)>>,
}

impl StartSampler {
    /// Item `i` picks `t` with probability `scale·x_{ti}`.
    pub fn new<S: Scalar>(x: &TimeIndexedSolution<S>, scale: f64) -> Self {
        let cumulative = (0..x.n())
            .map(|i| {
                let mut acc = 0.0;
                (0..x.horizon())
                    .filter_map(|t| {
                        let p = scale * x.get(t, i).to_f64_lossy();
                        (p > 0.0).then(|| {
                            acc += p;
                            (t, acc)
                        })
                    })
                    .collect()
            })
            .collect();
        StartSampler { cumulative }
    }

    pub fn n(&self) -> usize {
        self.cumulative.len()
    }

    /// Probability that item `i` picks a time at most `last`.
    pub fn mass_through(&self, i: usize, last: u64) -> f64 {
        let c = &self.cumulative[i];
        match c.partition_point(|&(t, _)| t <= last) {
            0 => 0.0,
            k => c[k - 1].1,
        }
    }

    pub fn sample_item<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Option<u64> {
        let u: f64 = rng.random();
        let c = &self.cumulative[i];
        let k = c.partition_point(|&(_, acc)| acc <= u);
        c.get(k).map(|&(t, _)| t)
    }

    /// Draw of item `i` conditioned on a start at most `last`; `None` when
    /// that event has no mass.
    pub fn sample_through<R: Rng + ?Sized>(&self, i: usize, last: u64, rng: &mut R) -> Option<u64> {
        let mass = self.mass_through(i, last);
        if mass <= 0.0 {
            return None;
        }
        let u = rng.random::<f64>() * mass;
        let c = &self.cumulative[i];
        let k = c.partition_point(|&(_, acc)| acc <= u);
        Some(c[k.min(c.len() - 1)].0.min(last))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Option<u64>> {
        (0..self.n()).map(|i| self.sample_item(i, rng)).collect()
    }
}

/// Both rounds of one rounding run.
#[derive(Clone, Debug, PartialEq)]
pub struct Rounding {
    pub times: Vec<Option<u64>>,
    pub kept: Vec<bool>,
    pub sequence: UniversalSequence,
}

impl Rounding {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "times": self.times,
            "kept": self.kept,
            "sequence": self.sequence.as_slice(),
        })
    }
}

/// Rounds a time-indexed solution into a sequence. Without `already_scaled`
/// the input is `x*` (feasible) and items pick `t` with probability
/// `x*_{ti}/4`; with it the input already is `x*/4` (`4x` feasible) and is
/// used as is.
pub fn round_solution<S: Scalar>(
    x: &TimeIndexedSolution<S>,
    inst: &Instance<S>,
    already_scaled: bool,
    rule: SurvivalRule,
    seed: u64,
) -> Result<Rounding> {
    let sampler = checked_sampler(x, inst, already_scaled)?;
    let mut rng = task_rng(seed, 0);
    let times = sampler.sample(&mut rng);
    let kept = second_round(x.sizes(), &times, rule);
    let sequence = UniversalSequence::new(order_by_times(&times, &kept), x.n())?;
    Ok(Rounding { times, kept, sequence })
}

fn checked_sampler<S: Scalar>(x: &TimeIndexedSolution<S>, inst: &Instance<S>, already_scaled: bool) -> Result<StartSampler> {
    if x.sizes() != inst.sizes().as_slice() {
        return Err(Error::InvalidParameter("solution and instance sizes differ".into()));
    }
    let (feasible_form, scale) = if already_scaled {
        (x.scaled(&S::from_int(4)), 1.0)
    } else {
        (x.clone(), 0.25)
    };
    let violation = time_indexed_violation(&feasible_form);
    if violation > S::tolerance() {
        return Err(Error::Precondition(format!(
            "{} violates the time-indexed relaxation by {}",
            if already_scaled { "4x" } else { "x" },
            violation.render()
        )));
    }
    Ok(StartSampler::new(x, scale))
}

/// Settings of [`crs_verify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CrsConfig {
    pub trials: u64,
    pub seed: u64,
    pub rule: SurvivalRule,
    pub already_scaled: bool,
    /// Sampled `(A ⊆ A′)` pairs for the monotonicity check.
    pub pairs: usize,
}

impl CrsConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        CrsConfig {
            trials,
            seed,
            rule: SurvivalRule::default(),
            already_scaled: false,
            pairs: 16,
        }
    }

    pub fn with_rule(mut self, rule: SurvivalRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn scaled(mut self, already_scaled: bool) -> Self {
        self.already_scaled = already_scaled;
        self
    }
}

/// Conditional survival statistics of one item.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemSurvival {
    pub item: usize,
    /// `x̄*_{ti}/4`, where `x̄` sums starts up to `t − s(i)`.
    pub xbar_quarter: f64,
    /// Trials with `i ∈ R`.
    pub in_r: u64,
    /// Trials with `i ∈ I_t`.
    pub survived: u64,
    pub frequency: f64,
    /// `0.5/√in_r`.
    pub sigma: f64,
    /// `frequency ≥ 1/2 − 3σ`; false when `i` never entered `R`.
    pub pass: bool,
}

/// Paired comparison of one sampled pair `A ⊆ A′` for one item of `A`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonePair {
    pub small: Vec<usize>,
    pub large: Vec<usize>,
    pub item: usize,
    pub samples: u64,
    pub survived_small: u64,
    pub survived_large: u64,
    /// Samples where `i` survives under `A′` but not under `A`.
    pub pointwise_violations: u64,
}

impl MonotonePair {
    pub fn holds(&self) -> bool {
        self.pointwise_violations == 0 && self.survived_small >= self.survived_large
    }
}

/// Empirical check of the contention-resolution scheme at capacity `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrsReport {
    pub t: u64,
    pub trials: u64,
    pub rule: SurvivalRule,
    /// Trials with `s(I_t) > t`.
    pub feasibility_violations: u64,
    pub items: Vec<ItemSurvival>,
    pub pairs: Vec<MonotonePair>,
}

impl CrsReport {
    pub fn feasibility_ok(&self) -> bool {
        self.feasibility_violations == 0
    }

    pub fn survival_ok(&self) -> bool {
        self.items.iter().all(|s| s.pass)
    }

    pub fn monotone_ok(&self) -> bool {
        self.pairs.iter().all(MonotonePair::holds)
    }

    pub fn passes(&self) -> bool {
        self.feasibility_ok() && self.survival_ok() && self.monotone_ok()
    }

    pub fn worst_frequency(&self) -> Option<f64> {
        self.items.iter().map(|s| s.frequency).reduce(f64::min)
    }
}

#[derive(Clone, Default)]
struct Tally {
    infeasible: u64,
    in_r: Vec<u64>,
    survived: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.infeasible += other.infeasible;
        for (a, b) in self.in_r.iter_mut().zip(other.in_r) {
            *a += b;
        }
        for (a, b) in self.survived.iter_mut().zip(other.survived) {
            *a += b;
        }
        self
    }
}

/// Runs the rounding `trials` times and checks, at capacity `t`: feasibility
/// `s(I_t) ≤ t` in every trial; `Pr[i ∈ I_t | i ∈ R] ≥ 1/2 − 3σ` for every
/// item with `x̄*_{ti} > 0`; and monotonicity of the per-capacity scheme
/// on sampled pairs `A ⊆ A′` with shared per-item samples.
pub fn crs_verify<S: Scalar>(
    x: &TimeIndexedSolution<S>,
    inst: &Instance<S>,
    t: u64,
    config: &CrsConfig,
) -> Result<CrsReport> {
    if config.trials < CRS_MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "{} trials are fewer than the minimum {CRS_MIN_TRIALS}",
            config.trials
        )));
    }
    let sampler = checked_sampler(x, inst, config.already_scaled)?;
    let sizes = x.sizes().to_vec();
    let n = sizes.len();
    let rule = config.rule;
    let tally = (0..CRS_TASKS)
        .into_par_iter()
        .map(|task| {
            let count = config.trials / CRS_TASKS + u64::from(task < config.trials % CRS_TASKS);
            let mut rng = task_rng(config.seed, task);
            let mut tally = Tally {
                infeasible: 0,
                in_r: vec![0; n],
                survived: vec![0; n],
            };
            for _ in 0..count {
                let times = sampler.sample(&mut rng);
                let kept = second_round(&sizes, &times, rule);
                let mut load = 0u64;
                for i in 0..n {
                    let Some(ti) = times[i] else { continue };
                    if rule.in_window(ti, sizes[i], t) {
                        tally.in_r[i] += 1;
                        if kept[i] {
                            tally.survived[i] += 1;
                            load += sizes[i];
                        }
                    }
                }
                if load > t {
                    tally.infeasible += 1;
                }
            }
            tally
        })
        .reduce(
            || Tally {
                infeasible: 0,
                in_r: vec![0; n],
                survived: vec![0; n],
            },
            Tally::merge,
        );

    let scale = if config.already_scaled { 1.0 } else { 0.25 };
    let items = (0..n)
        .filter_map(|i| {
            let xbar = t.checked_sub(sizes[i]).map_or(0.0, |last| {
                (0..=last.min(x.horizon().saturating_sub(1)))
                    .map(|tp| x.get(tp, i).to_f64_lossy())
                    .sum::<f64>()
            });
            if xbar <= 0.0 {
                return None;
            }
            let m = tally.in_r[i];
            let frequency = if m == 0 { 0.0 } else { tally.survived[i] as f64 / m as f64 };
            let sigma = if m == 0 { f64::INFINITY } else { 0.5 / (m as f64).sqrt() };
            Some(ItemSurvival {
                item: i,
                xbar_quarter: xbar * scale,
                in_r: m,
                survived: tally.survived[i],
                frequency,
                sigma,
                pass: m > 0 && frequency >= 0.5 - 3.0 * sigma,
            })
        })
        .collect();

    let pairs = monotone_pairs(&sampler, &sizes, t, config)?;
    Ok(CrsReport {
        t,
        trials: config.trials,
        rule,
        feasibility_violations: tally.infeasible,
        items,
        pairs,
    })
}

/// The per-capacity scheme `π`: every item of `set` draws a start in its
/// window with probability proportional to `x`; survival follows `rule`.
fn pi_survivors(set: &[usize], starts: &[Option<u64>], sizes: &[u64], rule: SurvivalRule) -> Vec<bool> {
    let times: Vec<Option<u64>> = (0..sizes.len())
        .map(|i| if set.contains(&i) { starts[i] } else { None })
        .collect();
    second_round(sizes, &times, rule)
}

fn monotone_pairs(sampler: &StartSampler, sizes: &[u64], t: u64, config: &CrsConfig) -> Result<Vec<MonotonePair>> {
    let n = sizes.len();
    let rule = config.rule;
    // items whose window carries mass, and their window-restricted samplers
    let window: Vec<(usize, f64)> = (0..n)
        .filter_map(|i| {
            let last = rule.window_end(sizes[i], t)?;
            let mass = sampler.mass_through(i, last);
            (mass > 0.0).then_some((i, mass))
        })
        .collect();
    if window.is_empty() || config.pairs == 0 {
        return Ok(Vec::new());
    }
    let samples = (config.trials / config.pairs as u64).max(1000);
    let mut pick = task_rng(config.seed ^ 0x005E_ED0F_A1B5, 0);
    let mut pairs = Vec::with_capacity(config.pairs);
    for p in 0..config.pairs {
        let mut large: Vec<usize> = window.iter().map(|&(i, _)| i).filter(|_| pick.random_bool(0.7)).collect();
        if large.is_empty() {
            large.push(window[pick.random_range(0..window.len())].0);
        }
        let item = large[pick.random_range(0..large.len())];
        let small: Vec<usize> = large.iter().copied().filter(|&j| j == item || pick.random_bool(0.5)).collect();
        let mut rng = task_rng(config.seed, CRS_TASKS + p as u64);
        let (mut s_small, mut s_large, mut bad) = (0, 0, 0);
        for _ in 0..samples {
            let starts: Vec<Option<u64>> = (0..n)
                .map(|i| {
                    let last = rule.window_end(sizes[i], t)?;
                    sampler.sample_through(i, last, &mut rng)
                })
                .collect();
            let a = pi_survivors(&small, &starts, sizes, rule)[item];
            let b = pi_survivors(&large, &starts, sizes, rule)[item];
            s_small += u64::from(a);
            s_large += u64::from(b);
            bad += u64::from(b && !a);
        }
        pairs.push(MonotonePair {
            small,
            large,
            item,
            samples,
            survived_small: s_small,
            survived_large: s_large,
            pointwise_violations: bad,
        });
    }
    Ok(pairs)
}
