//! End-to-end acceptance checks. Each criterion reports one PASS/FAIL line
//! on stderr, written directly so the lines survive output capture.

mod common;

use std::io::Write;
use std::time::Instant;

use common::lemmas::{check_instance, LemmaCounts};
use common::{desk_instance, fit_into, noise};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use submod_knapsack::instances::{generate_random, make_fixture, Family, FixtureId, GeneratorSpec, Instance};
use submod_knapsack::oracle::{
    default_capacities, deterministic_and_half_mixture, geometric_sweep, interval_reduction, robustness_profile,
    smpsc_optimal_sequence, PolicyId,
};
use submod_knapsack::policies::{exhaustive_policy_search, PolicyConfig, SearchObjective};
use submod_knapsack::stochastic::*;
use submod_knapsack::submodular::verify_structure;
use submod_knapsack::{Rational, Scalar};

/// Criteria expected to fail as literally stated; their corrected variants
/// must pass instead.
const KNOWN_DEVIATIONS: [u32; 3] = [9, 11, 13];

const CORPUS: u64 = 500;

struct Outcome {
    pass: bool,
    /// Status of the corrected variant, for criteria with one.
    corrected: Option<bool>,
    detail: String,
}

impl Outcome {
    fn plain(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            corrected: None,
            detail,
        }
    }
}

fn report(text: String) {
    let mut err = std::io::stderr().lock();
    writeln!(err, "{text}").expect("stderr is writable");
}

struct Line {
    id: u32,
    outcome: Outcome,
    secs: f64,
}

fn run(id: u32, budget_secs: f64, f: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let mut outcome = f();
    let secs = start.elapsed().as_secs_f64();
    if secs > budget_secs {
        outcome.pass = false;
        outcome.detail += &format!("; over the {budget_secs} s budget");
    }
    let line = Line { id, outcome, secs };
    report(format!(
        "acceptance {:>2}: {} ({:.2} s) {}",
        line.id,
        if line.outcome.pass { "PASS" } else { "FAIL" },
        line.secs,
        line.outcome.detail
    ));
    line
}

fn corpus_instance(seed: u64) -> Instance<f64> {
    let n = 1 + (seed % 8) as usize;
    let size_max = 2 + seed % 7;
    generate_random(&GeneratorSpec::new(n, 1, size_max, Family::Mixed), seed).unwrap()
}

fn eight_ninths() -> Outcome {
    let inst = make_fixture::<Rational>(FixtureId::KpucEightNinths).unwrap();
    let w = vec![Rational::from_ratio(4, 9), Rational::from_ratio(5, 9)];
    let search = exhaustive_policy_search(&inst, &[4, 5], &SearchObjective::Expected(w), true).unwrap();
    Outcome::plain(
        search.score == Rational::from_ratio(8, 9),
        format!("best expected ratio {} over {} policies", search.score.render(), search.frontier_size),
    )
}

fn golden_ratio_constants() -> Outcome {
    let inst = make_fixture::<Rational>(FixtureId::UnitSqrt5).unwrap();
    let (det, mix) = deterministic_and_half_mixture(&inst, &[1, 2], 0).unwrap();
    let root5 = 5f64.sqrt();
    let det_err = (det.to_f64_lossy() - (1.0 + root5) / 4.0).abs();
    let mix_err = (mix.to_f64_lossy() - (5.0 + root5) / 8.0).abs();
    Outcome::plain(
        det_err <= 1e-12 && mix_err <= 1e-12,
        format!("deterministic error {det_err:.1e}, half mixture error {mix_err:.1e}"),
    )
}

fn policy_floor(policy: PolicyId) -> Outcome {
    let mut violations = Vec::new();
    let mut capacities = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..CORPUS {
        let inst = corpus_instance(seed);
        let caps = default_capacities(&inst);
        capacities += caps.len();
        let report = robustness_profile(policy, &inst, &caps, "corpus").unwrap();
        worst = worst.min(report.worst_ratio());
        if !report.meets_floor() {
            violations.push(seed);
        }
    }
    Outcome::plain(
        violations.is_empty(),
        format!(
            "{policy}: {CORPUS} instances, {capacities} capacities, worst ratio {worst:.5} vs floor {:.5}, violating seeds {violations:?}",
            policy.floor().unwrap()
        ),
    )
}

fn instrumented_inequalities() -> Outcome {
    let mut counts = LemmaCounts::default();
    for seed in 0..CORPUS {
        check_instance(&corpus_instance(seed), &mut counts);
    }
    let detail = counts
        .tallies()
        .iter()
        .map(|(name, t)| format!("{name} {}/{}/{}", t.checked, t.skipped, t.violations))
        .collect::<Vec<_>>()
        .join(", ");
    let all_checked = counts.tallies().iter().all(|(_, t)| t.checked > 0);
    Outcome::plain(
        counts.clean() && all_checked,
        format!("checked/skipped/violations: {detail}"),
    )
}

fn geometric_hardness() -> Outcome {
    let four = geometric_sweep(4, 4).unwrap();
    let eight = geometric_sweep(8, 4).unwrap();
    let pass = four.sequences.len() == 24 && four.within_bound() && eight.within_bound() && eight.best() <= four.best();
    Outcome::plain(
        pass,
        format!(
            "M=4: {} sequences, best {} worst {} bound {}; M=8: best {} bound {}",
            four.sequences.len(),
            four.best(),
            four.worst(),
            four.bound(),
            eight.best(),
            eight.bound()
        ),
    )
}

fn reductions_are_submodular() -> Outcome {
    let mut verified = 0;
    let mut failures = Vec::new();
    let mut seed = 0u64;
    while verified < 60 {
        let n = 1 + (seed % 3) as usize;
        let spec = GeneratorSpec::new(n, 1, 3, Family::Mixed).with_distribution(2);
        let inst = generate_random::<f64>(&spec, seed).unwrap();
        let dist = inst.distribution().unwrap().clone();
        seed += 1;
        let Ok(iv) = interval_reduction(&inst, &dist) else { continue };
        if iv.copies().len() > 14 {
            continue;
        }
        verified += 1;
        let report = verify_structure(&iv).unwrap();
        if !report.all_pass() {
            failures.push(format!("seed {}: {}", seed - 1, report.summary()));
        }
    }
    Outcome::plain(
        failures.is_empty(),
        format!("{verified} reductions verified exhaustively, failures {failures:?}"),
    )
}

struct CrsTally {
    reports: u64,
    items: u64,
    infeasible: u64,
    low_survival: u64,
    never_sampled: u64,
    /// Items whose sampling mass is too small to expect a single draw.
    negligible: u64,
    monotone: u64,
    worst: f64,
}

/// Expected entries into `R` below which an empty count is not evidence.
const MIN_EXPECTED_ENTRIES: f64 = 20.0;

impl CrsTally {
    fn new() -> Self {
        CrsTally {
            reports: 0,
            items: 0,
            infeasible: 0,
            low_survival: 0,
            never_sampled: 0,
            negligible: 0,
            monotone: 0,
            worst: f64::INFINITY,
        }
    }

    fn add(&mut self, r: &CrsReport) {
        self.reports += 1;
        self.items += r.items.len() as u64;
        self.infeasible += r.feasibility_violations;
        self.low_survival += r.items.iter().filter(|s| !s.pass && s.in_r > 0).count() as u64;
        for s in r.items.iter().filter(|s| s.in_r == 0) {
            if s.xbar_quarter * r.trials as f64 >= MIN_EXPECTED_ENTRIES {
                self.never_sampled += 1;
            } else {
                self.negligible += 1;
            }
        }
        self.monotone += r.pairs.iter().filter(|p| !p.holds()).count() as u64;
        if let Some(w) = r.items.iter().filter(|s| s.in_r > 0).map(|s| s.frequency).reduce(f64::min) {
            self.worst = self.worst.min(w);
        }
    }

    fn clean(&self) -> bool {
        self.items > 0 && self.infeasible == 0 && self.low_survival == 0 && self.never_sampled == 0 && self.monotone == 0
    }

    fn describe(&self) -> String {
        format!(
            "{} reports, {} items, {} infeasible trials, {} low survival, {} never in R, {} with negligible mass, {} monotonicity failures, worst frequency {:.4}",
            self.reports,
            self.items,
            self.infeasible,
            self.low_survival,
            self.never_sampled,
            self.negligible,
            self.monotone,
            self.worst
        )
    }
}

fn contention_resolution() -> Outcome {
    let mut literal = CrsTally::new();
    let mut corrected = CrsTally::new();
    let config = PseudoConfig {
        permissive: true,
        fractional: false,
        ..PseudoConfig::default()
    };
    for seed in 0..20u64 {
        let (inst, dist) = desk_instance(seed, 2 + (seed % 4) as usize, 4, Family::Mixed);
        let prepared = prepare_pseudopoly(&inst, &dist, &config).unwrap();
        let point = prepared.point.as_ref().unwrap();
        let horizon = point.horizon();
        for t in [horizon.div_ceil(2), horizon] {
            for (rule, tally) in [(SurvivalRule::Inclusive, &mut literal), (SurvivalRule::Corrected, &mut corrected)] {
                let cfg = CrsConfig::new(100_000, seed).with_rule(rule).scaled(true);
                tally.add(&crs_verify(point, &prepared.pre.instance, t, &cfg).unwrap());
            }
        }
    }
    Outcome {
        pass: literal.clean(),
        corrected: Some(corrected.clean()),
        detail: format!(
            "as stated: {}; corrected window: {}",
            literal.describe(),
            corrected.describe()
        ),
    }
}

/// χ² statistic and degrees of freedom of one item's start-time counts;
/// bins with expected count below 5 are pooled.
fn chi_square(observed: &[u64], probs: &[f64], draws: u64) -> Option<(f64, f64)> {
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * draws as f64;
        if p <= 0.0 {
            if o > 0 {
                return None;
            }
            continue;
        }
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    Some((stat, bins.saturating_sub(1) as f64))
}

fn sampler_chi_square(seed: u64) -> (f64, String) {
    let (inst, dist) = desk_instance(seed, 2 + (seed % 3) as usize, 4, Family::Mixed);
    let config = Alg5Config {
        permissive: true,
        ..Alg5Config::default().with_steps(40)
    };
    let prepared = prepare_algorithm5(&inst, &dist, &config).unwrap();
    let (Some(bp), Some(y)) = (&prepared.breakpoints, &prepared.y) else {
        return (1.0, format!("seed {seed}: nothing to sample"));
    };
    let quarter = config.stopping_time;
    let x = conversion_expand(&y.scaled(&(1.0 / quarter)), bp)
        .unwrap()
        .scaled(&(config.sampling_scale * quarter));
    let horizon = x.horizon() as usize;
    let n = x.n();
    let draws = 20_000u64;
    let mut counts = vec![vec![0u64; horizon + 1]; n];
    for s in 0..draws {
        let draw = prepared.sample(s).unwrap();
        for (i, row) in counts.iter_mut().enumerate() {
            let start = draw.starts[prepared.pre.kept[i]];
            row[start.map_or(horizon, |(_, t)| t as usize)] += 1;
        }
    }
    let (mut stat, mut dof) = (0.0, 0.0);
    for (i, row) in counts.iter().enumerate() {
        let mut probs: Vec<f64> = (0..horizon as u64).map(|t| *x.get(t, i)).collect();
        probs.push(1.0 - probs.iter().sum::<f64>());
        match chi_square(row, &probs, draws) {
            Some((s, d)) => {
                stat += s;
                dof += d;
            }
            None => return (0.0, format!("seed {seed}: impossible start observed")),
        }
    }
    let p = if dof > 0.0 { ChiSquared::new(dof).unwrap().sf(stat) } else { 1.0 };
    (p, format!("seed {seed}: χ²={stat:.1} dof={dof} p={p:.3}"))
}

fn compact_conversion() -> Outcome {
    let mut pairs = 0;
    let mut failures = Vec::new();
    for seed in 0..34u64 {
        let (inst, dist) = desk_instance(seed, 1 + (seed % 5) as usize, 5, Family::Mixed);
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let full = build_full_relaxation(&inst, &dist).unwrap();
        for (k, eps) in [0.05, 0.1, 0.25].into_iter().enumerate() {
            pairs += 1;
            let (bp, poly) = build_compact_relaxation(&inst, &dist, eps).unwrap();
            let salt = seed * 3 + k as u64;
            let y = CompactSolution::new(&bp, fit_into(&poly, &noise(salt, bp.dim()))).unwrap();
            let conv = check_conversion(&y, &bp, &ext, &dist, 1e-7).unwrap();
            let x = fit_into(&full, &noise(salt + 5000, full.dim()));
            let x = TimeIndexedSolution::new(dist.horizon(), inst.sizes(), x).unwrap();
            let comp = check_compaction(&x, &bp, &ext, &dist, 1e-7).unwrap();
            if !conv.holds || !comp.holds {
                failures.push(format!("seed {seed} ε {eps}"));
            }
        }
    }
    let cases: Vec<(f64, String)> = (0..12).map(sampler_chi_square).collect();
    let rejected: Vec<&String> = cases.iter().filter(|(p, _)| *p < 0.001).map(|(_, d)| d).collect();
    let min_p = cases.iter().map(|(p, _)| *p).fold(1.0, f64::min);
    Outcome::plain(
        failures.is_empty() && rejected.is_empty(),
        format!(
            "{pairs} (instance, ε) pairs, failures {failures:?}; {} sampler cases, smallest p {min_p:.4}, rejected {rejected:?}",
            cases.len()
        ),
    )
}

fn gap_point(t: u64, middle: Rational) -> TimeIndexedSolution<Rational> {
    let mut x = TimeIndexedSolution::zeros(2 * t + 1, vec![t, t, 1]);
    x.set(0, 0, Rational::from_int(1));
    x.set(0, 1, middle);
    x.set(t - 1, 2, Rational::from_int(1));
    x
}

fn integrality_gap() -> Outcome {
    let mut printed_ok = true;
    let mut corrected_ok = true;
    let mut notes = Vec::new();
    for t in [5u64, 20, 100] {
        let inst = make_fixture::<Rational>(FixtureId::IntegralityGap { t }).unwrap();
        let dist = inst.distribution().unwrap().clone();
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let ti = t as i64;
        let (_, integer) = smpsc_optimal_sequence(&inst, &dist).unwrap();
        let integer_ok = integer == Rational::from_int(1);

        let printed = gap_point(t, Rational::from_ratio(ti - 1, ti));
        let violation = time_indexed_violation(&printed);
        let value = printed.objective(&ext, &dist);
        printed_ok &= integer_ok && violation <= Rational::from_int(0) && value == Rational::from_int(3) - Rational::from_ratio(1, ti);

        let fixed = gap_point(t, Rational::from_ratio(ti - 2, ti - 1));
        let fixed_value = fixed.objective(&ext, &dist);
        corrected_ok &= integer_ok
            && time_indexed_violation(&fixed) <= Rational::from_int(0)
            && fixed_value == Rational::from_int(3) - Rational::from_ratio(1, ti - 1);
        notes.push(format!(
            "T={t}: integer optimum {}, stated point value {} violation {}, corrected point value {}",
            integer.render(),
            value.render(),
            violation.render(),
            fixed_value.render()
        ));
    }
    Outcome {
        pass: printed_ok,
        corrected: Some(corrected_ok),
        detail: notes.join("; "),
    }
}

fn end_to_end() -> Outcome {
    let floor = 1.0 - (-0.25f64).exp() - 0.02;
    let config = Alg5Config {
        permissive: true,
        ..Alg5Config::default()
    };
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let modular = seed % 2 == 0;
        let family = if modular { Family::Modular } else { Family::Mixed };
        let (inst, dist) = desk_instance(seed, 2 + (seed % 5) as usize, 4, family);
        let prepared = prepare_algorithm5(&inst, &dist, &config).unwrap();
        let (_, opt) = smpsc_optimal_sequence(&inst, &dist).unwrap();
        let sweep = sweep_algorithm5(&prepared, &inst, &dist, 0, 100).unwrap();
        let ratio = sweep.mean / opt;
        ratios.push(ratio);
        let pre = &prepared.pre;
        let bp = prepared.breakpoints.as_ref().unwrap();
        let bound = if modular {
            let w = modular_compact_weights(bp, &pre.distribution, pre.instance.function());
            lp_maximize(&compact_polytope::<f64>(bp).unwrap(), &w).unwrap().value
        } else {
            let ext = Extension::new(pre.instance.function(), ExtensionMode::Exact).unwrap();
            let (seq, _) = smpsc_optimal_sequence(&pre.instance, &pre.distribution).unwrap();
            let x = TimeIndexedSolution::from_sequence(pre.distribution.horizon(), pre.instance.sizes(), seq.as_slice());
            compaction_project(&x, bp).unwrap().theta(bp, &ext, &pre.distribution)
        };
        let theta = prepared.theta().unwrap();
        if ratio < 0.03 || theta + 1e-9 < floor * bound {
            failures.push(format!("seed {seed}: mean/opt {ratio:.4}, θ {theta:.4} vs {floor:.4}·{bound:.4}"));
        }
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome::plain(
        failures.is_empty(),
        format!("10 instances × 100 seeds, smallest mean/opt {min:.4}, failures {failures:?}"),
    )
}

/// Compares the continuous-greedy values of both relaxations. Greedy
/// outputs need not be ordered even though the relaxation optima are, so the
/// corrected variant also credits the compact side with the projection of
/// the full greedy point.
fn cross_pipeline() -> Outcome {
    let eps = 0.05;
    let tol = 1e-6;
    let mut failures = Vec::new();
    let mut corrected_failures = Vec::new();
    let mut checked = 0;
    for seed in 0..12u64 {
        let (inst, dist) = desk_instance(seed, 2 + (seed % 4) as usize, 5, Family::Mixed);
        if dist.horizon() > 30 {
            continue;
        }
        checked += 1;
        let pseudo = PseudoConfig {
            permissive: true,
            ..PseudoConfig::default()
        };
        let run = prepare_pseudopoly(&inst, &dist, &pseudo).unwrap().fractional.unwrap();
        let full = *run.value();
        let compact_cfg = Alg5Config {
            permissive: true,
            stopping_time: 1.0,
            ..Alg5Config::default().with_epsilon(eps)
        };
        let prepared = prepare_algorithm5(&inst, &dist, &compact_cfg).unwrap();
        let bp = prepared.breakpoints.as_ref().unwrap();
        let compact = prepared.theta().unwrap();
        let lower = |c: f64| (1.0 - eps) * (c - eps * bp.small_w) / 2.0;
        if compact + tol < full || full + tol < lower(compact) {
            failures.push(format!("seed {seed}: compact {compact:.6}, full {full:.6}, lower {:.6}", lower(compact)));
        }
        let ext = Extension::new(inst.function(), ExtensionMode::Exact).unwrap();
        let x = TimeIndexedSolution::new(dist.horizon(), inst.sizes(), run.point.clone()).unwrap();
        let projected = check_compaction(&x, bp, &ext, &dist, tol).unwrap();
        let best = compact.max(projected.theta);
        if !projected.holds || best + tol < full || full + tol < lower(best) {
            corrected_failures.push(format!("seed {seed}: best compact {best:.6}, full {full:.6}"));
        }
    }
    Outcome {
        pass: checked > 0 && failures.is_empty(),
        corrected: Some(checked > 0 && corrected_failures.is_empty()),
        detail: format!(
            "{checked} instances; greedy against greedy failures {failures:?}; with the projected full point failures {corrected_failures:?}"
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let lines = vec![
        run(1, 1.0, eight_ninths),
        run(2, 1.0, golden_ratio_constants),
        run(3, 120.0, || policy_floor(PolicyId::Alg2)),
        run(4, 120.0, || policy_floor(PolicyId::Alg3(PolicyConfig::default()))),
        run(5, 120.0, || policy_floor(PolicyId::Alg4)),
        run(6, 600.0, instrumented_inequalities),
        run(7, 10.0, geometric_hardness),
        run(8, 60.0, reductions_are_submodular),
        run(9, 300.0, contention_resolution),
        run(10, 600.0, compact_conversion),
        run(11, 1.0, integrality_gap),
        run(12, 900.0, end_to_end),
        run(13, 600.0, cross_pipeline),
    ];
    let passed = lines.iter().filter(|l| l.outcome.pass).count();
    report(format!("acceptance: {passed}/{} criteria pass", lines.len()));
    for line in &lines {
        if KNOWN_DEVIATIONS.contains(&line.id) {
            report(format!(
                "acceptance {:>2}: corrected variant {}",
                line.id,
                if line.outcome.corrected == Some(true) { "PASS" } else { "FAIL" }
            ));
            assert_eq!(line.outcome.corrected, Some(true), "criterion {} corrected variant", line.id);
        } else {
            assert!(line.outcome.pass, "criterion {}: {}", line.id, line.outcome.detail);
        }
    }
}
