mod common;

use std::collections::HashMap;

use common::{desk_instance, fit_into, noise};
use submod_knapsack::instances::{make_fixture, CapacityDistribution, Family, FixtureId, Instance};
use submod_knapsack::oracle::smpsc_optimal_sequence;
use submod_knapsack::policies::UniversalSequence;
use submod_knapsack::stochastic::*;
use submod_knapsack::{Rational, Scalar, SubmodularFunction};

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn gap_point(t: u64, middle: Rational) -> TimeIndexedSolution<Rational> {
    let mut x = TimeIndexedSolution::zeros(2 * t + 1, vec![t, t, 1]);
    x.set(0, 0, Rational::from_int(1));
    x.set(0, 1, middle);
    x.set(t - 1, 2, Rational::from_int(1));
    x
}

/// Weights of `F̄` when `f` is modular: `x_{ti}` counts at every support
/// point `c` with `t ≤ c − s(i)`.
fn modular_full_weights(sizes: &[u64], weights: &[Rational], dist: &CapacityDistribution<Rational>) -> Vec<Rational> {
    let n = sizes.len();
    let horizon = dist.horizon();
    let mut w = vec![Rational::from_int(0); horizon as usize * n];
    for (c, p) in dist.support() {
        for (i, &s) in sizes.iter().enumerate() {
            if let Some(last) = c.checked_sub(s) {
                for t in 0..=last.min(horizon - 1) {
                    w[full_index(n, t, i)] += p * &weights[i];
                }
            }
        }
    }
    w
}

#[test]
fn gap_point_as_printed_misses_one_constraint_by_one_over_t() {
    for t in [5u64, 20, 100] {
        let x = gap_point(t, r(t as i64 - 1, t as i64));
        assert_eq!(time_indexed_violation(&x), r(1, t as i64), "T = {t}");
    }
}

#[test]
fn corrected_gap_point_is_feasible_and_optimal() {
    for t in [5u64, 20] {
        let inst = make_fixture::<Rational>(FixtureId::IntegralityGap { t }).unwrap();
        let dist = inst.distribution().unwrap().clone();
        let ti = t as i64;
        let x = gap_point(t, r(ti - 2, ti - 1));
        assert!(time_indexed_violation(&x) <= Rational::from_int(0));
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let value = x.objective(&ext, &dist);
        assert_eq!(value, Rational::from_int(3) - r(1, ti - 1));
        let poly = build_full_relaxation(&inst, &dist).unwrap();
        let w = modular_full_weights(&inst.sizes(), &vec![Rational::from_int(1); 3], &dist);
        let lp = lp_maximize(&poly, &w).unwrap();
        assert_eq!(lp.value, value, "T = {t}");
    }
}

#[test]
fn gap_integer_optimum_is_one() {
    for t in [5u64, 20, 100] {
        let inst = make_fixture::<Rational>(FixtureId::IntegralityGap { t }).unwrap();
        let dist = inst.distribution().unwrap().clone();
        let (_, v) = smpsc_optimal_sequence(&inst, &dist).unwrap();
        assert_eq!(v, Rational::from_int(1));
    }
}

#[test]
fn every_sequence_induces_a_feasible_point() {
    for seed in 0..12 {
        let (inst, _) = desk_instance(seed, 5, 4, Family::Mixed);
        let horizon = inst.total_size();
        let mut order: Vec<usize> = (0..inst.n()).collect();
        loop {
            let x = TimeIndexedSolution::<f64>::from_sequence(horizon, inst.sizes(), &order);
            assert!(time_indexed_violation(&x) <= 1e-12, "seed {seed}, order {order:?}");
            if !next_perm(&mut order) {
                break;
            }
        }
    }
}

fn next_perm(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[test]
fn compact_greedy_on_gap_beats_the_greedy_guarantee() {
    let inst = make_fixture::<f64>(FixtureId::IntegralityGap { t: 5 }).unwrap();
    let dist = inst.distribution().unwrap().clone();
    let (bp, poly) = build_compact_relaxation(&inst, &dist, 0.1).unwrap();
    let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
    let obj = CompactObjective::new(&ext, &bp, &dist);
    let run = continuous_greedy(&obj, &poly, &1.0, 200).unwrap();
    let target = (1.0 - (-1.0f64).exp() - 0.02) * (3.0 - 1.0 / 5.0);
    assert!(*run.value() >= target, "{} < {target}", run.value());
    assert!(poly.max_violation(&run.point) <= 1e-9);
    assert!(run.is_nondecreasing(&1e-12));
}

#[test]
fn greedy_point_over_stopping_time_is_feasible() {
    for seed in 0..6 {
        let (inst, dist) = desk_instance(seed, 4, 4, Family::Mixed);
        let (bp, poly) = build_compact_relaxation(&inst, &dist, 0.2).unwrap();
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let obj = CompactObjective::new(&ext, &bp, &dist);
        let run = continuous_greedy(&obj, &poly, &0.25, 30).unwrap();
        let scaled: Vec<f64> = run.point.iter().map(|v| v * 4.0).collect();
        assert!(poly.max_violation(&scaled) <= 1e-9, "seed {seed}");
        assert!(run.is_nondecreasing(&1e-12));
    }
}

#[test]
fn breakpoint_invariants_on_random_instances() {
    for seed in 0..40 {
        let (inst, dist) = desk_instance(seed, 1 + (seed % 6) as usize, 6, Family::Mixed);
        for eps in [0.05, 0.1, 0.3, 0.7] {
            let bp = BreakpointStructure::build(&inst, &dist, eps).unwrap();
            let v = bp.violations(&dist);
            assert!(v.is_empty(), "seed {seed}, ε {eps}: {v:?}");
        }
    }
}

#[test]
fn conversion_and_compaction_on_random_instances() {
    for seed in 0..25 {
        let (inst, dist) = desk_instance(seed, 4, 5, Family::Mixed);
        let eps = [0.05, 0.1, 0.25][seed as usize % 3];
        let (bp, poly) = build_compact_relaxation(&inst, &dist, eps).unwrap();
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let y = fit_into(&poly, &noise(seed, bp.dim()));
        let y = CompactSolution::new(&bp, y).unwrap();
        let conv = check_conversion(&y, &bp, &ext, &dist, 1e-7).unwrap();
        assert!(conv.holds, "seed {seed}: {conv:?}");
        let full = build_full_relaxation(&inst, &dist).unwrap();
        let x = fit_into(&full, &noise(seed + 1000, full.dim()));
        let x = TimeIndexedSolution::new(dist.horizon(), inst.sizes(), x).unwrap();
        let comp = check_compaction(&x, &bp, &ext, &dist, 1e-7).unwrap();
        assert!(comp.holds, "seed {seed}: {comp:?}");
    }
}

#[test]
fn conversion_rejects_infeasible_input() {
    let inst = make_fixture::<f64>(FixtureId::KpucEightNinths).unwrap();
    let dist = inst.distribution().unwrap().clone();
    let bp = BreakpointStructure::build(&inst, &dist, 0.1).unwrap();
    let y = CompactSolution::new(&bp, vec![1.0; bp.dim()]).unwrap();
    assert!(conversion_expand(&y, &bp).is_err());
    let x = TimeIndexedSolution::new(9, inst.sizes(), vec![1.0; 27]).unwrap();
    assert!(compaction_project(&x, &bp).is_err());
}

/// Exact law of the survivor set: enumerate every first-round outcome.
fn exact_survivor_law(x: &TimeIndexedSolution<f64>, scale: f64, rule: SurvivalRule) -> HashMap<Vec<bool>, f64> {
    let n = x.n();
    let horizon = x.horizon();
    let options: Vec<Vec<(Option<u64>, f64)>> = (0..n)
        .map(|i| {
            let mut o: Vec<(Option<u64>, f64)> = (0..horizon)
                .filter(|&t| *x.get(t, i) > 0.0)
                .map(|t| (Some(t), scale * x.get(t, i)))
                .collect();
            let rest = 1.0 - o.iter().map(|(_, p)| p).sum::<f64>();
            o.push((None, rest));
            o
        })
        .collect();
    let mut law = HashMap::new();
    let mut idx = vec![0usize; n];
    loop {
        let times: Vec<Option<u64>> = (0..n).map(|i| options[i][idx[i]].0).collect();
        let p: f64 = (0..n).map(|i| options[i][idx[i]].1).product();
        // independent restatement of the discard rule
        let kept: Vec<bool> = (0..n)
            .map(|i| match times[i] {
                None => false,
                Some(ti) => {
                    let before: u64 = (0..n)
                        .filter(|&j| j != i && times[j].is_some_and(|tj| tj <= ti))
                        .map(|j| x.sizes()[j])
                        .sum();
                    match rule {
                        SurvivalRule::Inclusive => before + x.sizes()[i] < ti,
                        SurvivalRule::Corrected => before <= ti,
                    }
                }
            })
            .collect();
        *law.entry(kept).or_insert(0.0) += p;
        let mut k = 0;
        loop {
            if k == n {
                return law;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn rounding_matches_exhaustive_enumeration() {
    let sizes = vec![2u64, 1];
    let inst = Instance::new(sizes.clone(), SubmodularFunction::modular(vec![1.0, 1.0]).unwrap()).unwrap();
    let x = TimeIndexedSolution::new(3, sizes, vec![0.3, 0.2, 0.2, 0.4, 0.5, 0.0]).unwrap();
    assert!(time_indexed_violation(&x) <= 0.0);
    for rule in [SurvivalRule::Inclusive, SurvivalRule::Corrected] {
        let law = exact_survivor_law(&x, 0.25, rule);
        let trials = 40_000u64;
        let mut counts: HashMap<Vec<bool>, u64> = HashMap::new();
        for seed in 0..trials {
            let out = round_solution(&x, &inst, false, rule, seed).unwrap();
            *counts.entry(out.kept).or_insert(0) += 1;
        }
        for (kept, p) in &law {
            let freq = *counts.get(kept).unwrap_or(&0) as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1e-9);
            assert!((freq - p).abs() <= 5.0 * sigma, "{rule:?} {kept:?}: {freq} vs {p}");
        }
        assert!(counts.keys().all(|k| law.contains_key(k)));
    }
}

#[test]
fn single_item_at_time_zero() {
    let inst = Instance::new(vec![1], SubmodularFunction::modular(vec![1.0]).unwrap()).unwrap();
    let mut x = TimeIndexedSolution::zeros(1, vec![1]);
    x.set(0, 0, 1.0);
    let trials = 20_000u64;
    let mut chose = 0;
    let mut inclusive_kept = 0;
    let mut corrected_kept = 0;
    for seed in 0..trials {
        let a = round_solution(&x, &inst, false, SurvivalRule::Inclusive, seed).unwrap();
        let b = round_solution(&x, &inst, false, SurvivalRule::Corrected, seed).unwrap();
        assert_eq!(a.times, b.times);
        chose += u64::from(a.times[0] == Some(0));
        inclusive_kept += u64::from(a.kept[0]);
        corrected_kept += u64::from(b.kept[0]);
        assert_eq!(a.sequence, UniversalSequence::identity(1));
    }
    let freq = chose as f64 / trials as f64;
    assert!((freq - 0.25).abs() < 5.0 * (0.25 * 0.75 / trials as f64).sqrt());
    // s(J_i) ≥ s(i) = 1 > 0 = t_i, so the rule as written never keeps it
    assert_eq!(inclusive_kept, 0);
    assert_eq!(corrected_kept, chose);
}

#[test]
fn crs_on_gap_instance() {
    let inst = make_fixture::<f64>(FixtureId::IntegralityGap { t: 5 }).unwrap();
    let mut x = TimeIndexedSolution::zeros(11, vec![5, 5, 1]);
    x.set(0, 0, 1.0);
    x.set(0, 1, 0.75);
    x.set(4, 2, 1.0);
    let corrected = crs_verify(&x, &inst, 5, &CrsConfig::new(20_000, 3).with_rule(SurvivalRule::Corrected)).unwrap();
    assert!(corrected.passes(), "{corrected:?}");
    assert_eq!(corrected.items.len(), 3);
    // item 0 survives unless item 1 also starts at 0
    let f0 = corrected.items[0].frequency;
    assert!((f0 - (1.0 - 0.1875)).abs() < 0.03, "{f0}");
    let literal = crs_verify(&x, &inst, 5, &CrsConfig::new(20_000, 3)).unwrap();
    assert!(literal.feasibility_ok());
    // the window t_i ≤ t − s(i) − 1 excludes every start carrying mass
    assert!(literal.items.iter().all(|s| s.in_r == 0));
    assert!(!literal.survival_ok());
}

#[test]
fn crs_reports_are_reproducible() {
    let (inst, dist) = desk_instance(4, 4, 3, Family::Modular);
    let full = build_full_relaxation(&inst, &dist).unwrap();
    let x = TimeIndexedSolution::new(dist.horizon(), inst.sizes(), fit_into(&full, &noise(9, full.dim()))).unwrap();
    let cfg = CrsConfig::new(10_000, 77).with_rule(SurvivalRule::Corrected);
    let a = crs_verify(&x, &inst, dist.horizon(), &cfg).unwrap();
    let b = crs_verify(&x, &inst, dist.horizon(), &cfg).unwrap();
    assert_eq!(a, b);
    assert!(crs_verify(&x, &inst, 3, &CrsConfig::new(9_999, 1)).is_err());
}

#[test]
fn pseudopoly_fractional_value_on_gap() {
    let inst = make_fixture::<f64>(FixtureId::IntegralityGap { t: 5 }).unwrap();
    let dist = inst.distribution().unwrap().clone();
    let prepared = prepare_pseudopoly(&inst, &dist, &PseudoConfig::default()).unwrap();
    let frac = prepared.fractional.as_ref().unwrap();
    assert!(*frac.value() >= 0.9 * (3.0 - 0.2), "{}", frac.value());
    let (_, seq) = prepared.sample(1).unwrap();
    assert_eq!(seq.as_slice().len(), 3);
}

#[test]
fn implicit_sampler_matches_expanded_solution() {
    let inst = make_fixture::<f64>(FixtureId::KpucEightNinths).unwrap();
    let dist = inst.distribution().unwrap().clone();
    let cfg = Alg5Config::default().with_steps(50);
    let prepared = prepare_algorithm5(&inst, &dist, &cfg).unwrap();
    let bp = prepared.breakpoints.as_ref().unwrap();
    let y = prepared.y.as_ref().unwrap();
    // the block sampler picks t with probability scale · x_{ti}, x = expand(y)
    let x = conversion_expand(&y.scaled(&4.0), bp).unwrap().scaled(&(0.5 / 4.0));
    let draws = 30_000u64;
    let mut counts = vec![vec![0u64; 10]; 3];
    for seed in 0..draws {
        let d = prepared.sample(seed).unwrap();
        for (i, s) in d.starts.iter().enumerate() {
            counts[i][s.map_or(9, |(_, t)| t as usize)] += 1;
        }
    }
    for (i, row) in counts.iter().enumerate() {
        for t in 0..9u64 {
            let p = *x.get(t, i);
            let freq = row[t as usize] as f64 / draws as f64;
            assert!((freq - p).abs() <= 5.0 * (p * (1.0 - p) / draws as f64).sqrt() + 1e-12, "item {i}, t {t}");
        }
    }
}
