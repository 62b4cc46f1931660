use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use submod_knapsack::instances::{load_instance, make_fixture, FixtureId, Instance, LoadOptions, SQRT5};
use submod_knapsack::oracle::{
    default_capacities, deterministic_and_half_mixture, geometric_sweep, interval_reduction, randomized_game_value,
    robustness_profile, smpsc_expected_value, smpsc_optimal_sequence, solve_interval_bruteforce, PolicyId,
    SEQUENCE_SEARCH_LIMIT,
};
use submod_knapsack::policies::{exhaustive_policy_search, policy_frontier, SearchObjective, UniversalSequence};
use submod_knapsack::stochastic::{
    prepare_algorithm5, prepare_pseudopoly, sweep_algorithm5, Alg5Config, PseudoConfig, SeedSweep, GreedyRun,
};
use submod_knapsack::submodular::verify_structure;
use submod_knapsack::{Error, Rational, Scalar};

/// Acceptance floor on the mean achieved value relative to the optimum.
const SMPSC_RATIO_FLOOR: f64 = 0.03;
const CONSTANT_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "submod-knapsack", version, about = "Submodular maximization under uncertain knapsack capacity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a built-in instance as JSON.
    Fixture {
        /// kpuc89, unit_sqrt5, geometric(M,n) or integrality_gap(T).
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check f(∅)=0, nonnegativity, monotonicity and submodularity exhaustively.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Arith::Auto)]
        arith: Arith,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio of a policy against OPT_C at every capacity.
    Robustness {
        #[command(flatten)]
        source: Source,
        /// alg1, alg2, alg3 or alg4.
        #[arg(long)]
        policy: String,
        /// `a..b`, `a..=b` or a comma-separated list; defaults to 0..=s(I).
        #[arg(long)]
        capacities: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Arith::Auto)]
        arith: Arith,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the constant attached to a hardness fixture.
    Hardness {
        /// kpuc89, unit_sqrt5 or geometric(M,n).
        #[arg(long)]
        fixture: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a stochastic-capacity sequence pipeline.
    Smpsc {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Required for the randomized modes.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of consecutive seeds to sweep, starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Continuous-greedy steps.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Condition the capacity on `C ≥ s_min` instead of rejecting.
        #[arg(long)]
        permissive: bool,
        /// Exact arithmetic applies to interval-bruteforce only.
        #[arg(long, value_enum, default_value_t = Arith::Auto)]
        arith: Arith,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Built-in fixture id.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Arith {
    /// Exact for rational function families, float otherwise.
    Auto,
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Compact,
    Pseudopoly,
    IntervalBruteforce,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_capability() => 3,
            Failure::Core(Error::Invariant(_) | Error::Solver(_)) => 1,
            Failure::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

/// Text to emit and whether the checked property held.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn json(value: &Value, ok: bool) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("json value prints");
        text.push('\n');
        Outcome { text, ok }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (result, out) = run(cli.command);
    match result.and_then(|o| emit(&o.text, out.as_deref()).map(|()| o.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> (Result<Outcome, Failure>, Option<PathBuf>) {
    match command {
        Command::Fixture { id, out } => (cmd_fixture(&id), out),
        Command::Verify { source, arith, out } => (cmd_verify(&source, arith), out),
        Command::Robustness {
            source,
            policy,
            capacities,
            format,
            arith,
            out,
        } => (cmd_robustness(&source, &policy, capacities.as_deref(), format, arith), out),
        Command::Hardness { fixture, out } => (cmd_hardness(&fixture), out),
        Command::Smpsc {
            source,
            mode,
            eps,
            seed,
            seeds,
            steps,
            permissive,
            arith,
            out,
        } => {
            let opts = SmpscOptions {
                mode,
                eps,
                seed,
                seeds,
                steps,
                permissive,
            };
            (cmd_smpsc(&source, &opts, arith), out)
        }
    }
}

fn fixture_id(s: &str) -> Result<FixtureId, Failure> {
    FixtureId::from_str(s).map_err(|e| Failure::Usage(e.to_string()))
}

fn load<S: Scalar>(source: &Source, verify_tables: bool) -> Result<(Instance<S>, String), Failure> {
    match (&source.instance, &source.fixture) {
        (Some(path), None) => {
            let options = LoadOptions {
                verify_tables,
                ..LoadOptions::default()
            };
            Ok((load_instance(path, options)?, path.display().to_string()))
        }
        (None, Some(id)) => {
            let id = fixture_id(id)?;
            Ok((make_fixture(id)?, id.to_string()))
        }
        _ => Err(Failure::Usage("pass exactly one of --instance and --fixture".into())),
    }
}

/// Whether `arith` resolves to exact arithmetic for this source.
fn use_exact(source: &Source, arith: Arith) -> Result<bool, Failure> {
    Ok(match arith {
        Arith::Exact => true,
        Arith::Float => false,
        Arith::Auto => {
            let (inst, _) = load::<f64>(source, false)?;
            inst.function().is_exact_family()
        }
    })
}

fn arithmetic_name(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "float"
    }
}

fn cmd_fixture(id: &str) -> Result<Outcome, Failure> {
    let inst = make_fixture::<Rational>(fixture_id(id)?)?;
    Ok(Outcome::json(&inst.to_json(), true))
}

fn cmd_verify(source: &Source, arith: Arith) -> Result<Outcome, Failure> {
    fn go<S: Scalar>(source: &Source) -> Result<Outcome, Failure> {
        // tables are loaded unchecked so that a broken one yields a witness
        let (inst, name) = load::<S>(source, false)?;
        let report = verify_structure(inst.function())?;
        let value = json!({
            "instance": name,
            "family": inst.function().family_name(),
            "arithmetic": arithmetic_name(S::EXACT),
            "pass": report.all_pass(),
            "summary": report.summary(),
            "report": report,
        });
        Ok(Outcome::json(&value, report.all_pass()))
    }
    if use_exact(source, arith)? {
        go::<Rational>(source)
    } else {
        go::<f64>(source)
    }
}

fn parse_capacities(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Usage(format!("cannot parse capacities `{spec}`"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = spec.split_once("..=") {
        return Ok((num(a)?..=num(b)?).collect());
    }
    if let Some((a, b)) = spec.split_once("..") {
        return Ok((num(a)?..num(b)?).collect());
    }
    spec.split(',').map(num).collect()
}

fn cmd_robustness(
    source: &Source,
    policy: &str,
    capacities: Option<&str>,
    format: Format,
    arith: Arith,
) -> Result<Outcome, Failure> {
    fn go<S: Scalar>(source: &Source, policy: PolicyId, capacities: Option<&[u64]>, format: Format) -> Result<Outcome, Failure> {
        let (inst, name) = load::<S>(source, true)?;
        let caps = capacities.map_or_else(|| default_capacities(&inst), <[u64]>::to_vec);
        let report = robustness_profile(policy, &inst, &caps, &name)?;
        let ok = report.meets_floor();
        Ok(match format {
            Format::Csv => Outcome {
                text: report.to_csv(),
                ok,
            },
            Format::Json => Outcome::json(&report.to_json(), ok),
        })
    }
    let policy = PolicyId::from_str(policy).map_err(|e| Failure::Usage(e.to_string()))?;
    let caps = capacities.map(parse_capacities).transpose()?;
    if use_exact(source, arith)? {
        go::<Rational>(source, policy, caps.as_deref(), format)
    } else {
        go::<f64>(source, policy, caps.as_deref(), format)
    }
}

fn constant_row(name: &str, achieved: &Rational, target: &Rational, target_text: &str) -> (Value, bool) {
    let err = (achieved.clone() - target.clone()).to_f64_lossy().abs();
    let pass = err <= CONSTANT_TOLERANCE;
    (
        json!({
            "name": name,
            "achieved": achieved.to_f64_lossy(),
            "achieved_exact": achieved.render(),
            "target": target_text,
            "target_value": target.to_f64_lossy(),
            "abs_error": err,
            "pass": pass,
        }),
        pass,
    )
}

fn cmd_hardness(fixture: &str) -> Result<Outcome, Failure> {
    let id = fixture_id(fixture)?;
    let mut rows = Vec::new();
    let mut ok = true;
    let mut push = |(row, pass): (Value, bool)| {
        ok &= pass;
        rows.push(row);
    };
    match id {
        FixtureId::KpucEightNinths => {
            let inst = make_fixture::<Rational>(id)?;
            let caps = [4, 5];
            let w = vec![Rational::from_ratio(4, 9), Rational::from_ratio(5, 9)];
            let search = exhaustive_policy_search(&inst, &caps, &SearchObjective::Expected(w), true)?;
            let eight_ninths = Rational::from_ratio(8, 9);
            push(constant_row("best expected ratio", &search.score, &eight_ninths, "8/9"));
            let frontier = policy_frontier(&inst, &caps, true)?;
            let (game, _) = randomized_game_value(&frontier)?;
            push(constant_row("randomized game value", &game, &eight_ninths, "8/9"));
        }
        FixtureId::UnitSqrt5 => {
            let inst = make_fixture::<Rational>(id)?;
            let caps = [1, 2];
            let r5 = Rational::parse_scalar(SQRT5).expect("constant parses");
            let (det, mix) = deterministic_and_half_mixture(&inst, &caps, 0)?;
            let det_target = (Rational::from_int(1) + r5.clone()) / Rational::from_int(4);
            let mix_target = (Rational::from_int(5) + r5) / Rational::from_int(8);
            push(constant_row("best deterministic worst-case ratio", &det, &det_target, "(1+sqrt5)/4"));
            push(constant_row("p=1/2 mixture worst-case ratio", &mix, &mix_target, "(5+sqrt5)/8"));
        }
        FixtureId::Geometric { m, n } => {
            let sweep = geometric_sweep(m, n)?;
            let within = sweep.within_bound();
            ok &= within;
            rows.push(json!({
                "name": "best worst-case ratio over sequences",
                "achieved": sweep.best().to_f64_lossy(),
                "achieved_exact": sweep.best().render(),
                "worst_sequence_ratio": sweep.worst().render(),
                "bound": sweep.bound().render(),
                "target": "1/n + 2/M",
                "sequences": sweep.sequences.len(),
                "pass": within,
            }));
        }
        FixtureId::IntegralityGap { .. } => {
            return Err(Failure::Usage(
                "hardness supports kpuc89, unit_sqrt5 and geometric(M,n)".into(),
            ))
        }
    }
    let value = json!({ "fixture": id.to_string(), "constants": rows, "pass": ok });
    Ok(Outcome::json(&value, ok))
}

struct SmpscOptions {
    mode: Mode,
    eps: f64,
    seed: Option<u64>,
    seeds: u64,
    steps: usize,
    permissive: bool,
}

fn optimum_json<S: Scalar>(inst: &Instance<S>) -> Result<Option<(Value, f64)>, Failure> {
    if inst.n() > SEQUENCE_SEARCH_LIMIT {
        return Ok(None);
    }
    let dist = inst.require_distribution()?;
    let (seq, value) = smpsc_optimal_sequence(inst, dist)?;
    let v = value.to_f64_lossy();
    Ok(Some((json!({ "sequence": seq, "value": v, "value_exact": value.render() }), v)))
}

fn greedy_json<S: Scalar>(run: Option<&GreedyRun<S>>) -> Value {
    run.map_or(Value::Null, |r| json!(r.report()))
}

fn sweep_json(sweep: &SeedSweep, opt: Option<f64>) -> Value {
    let ratio = opt.filter(|o| *o > 0.0).map(|o| sweep.mean / o);
    json!({
        "sweep": sweep,
        "mean_over_optimum": ratio,
        "floor": SMPSC_RATIO_FLOOR,
        "meets_floor": ratio.map(|r| r >= SMPSC_RATIO_FLOOR),
    })
}

fn cmd_smpsc(source: &Source, opts: &SmpscOptions, arith: Arith) -> Result<Outcome, Failure> {
    if opts.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    let randomized = opts.mode != Mode::IntervalBruteforce;
    if randomized && opts.seed.is_none() {
        return Err(Failure::Usage("randomized modes need an explicit --seed".into()));
    }
    if randomized && arith == Arith::Exact {
        return Err(Failure::Usage(
            "exact arithmetic is available only with --mode interval-bruteforce".into(),
        ));
    }
    if opts.mode == Mode::IntervalBruteforce && use_exact(source, arith)? {
        return smpsc_interval::<Rational>(source);
    }
    let seed = opts.seed.unwrap_or(0);
    match opts.mode {
        Mode::IntervalBruteforce => smpsc_interval::<f64>(source),
        Mode::Compact => {
            let (inst, name) = load::<f64>(source, true)?;
            let dist = inst.require_distribution()?.clone();
            let mut cfg = Alg5Config::default().with_epsilon(opts.eps).with_steps(opts.steps);
            cfg.permissive = opts.permissive;
            let prepared = prepare_algorithm5(&inst, &dist, &cfg)?;
            let report = prepared.report(&inst, &dist, seed)?;
            let sweep = sweep_algorithm5(&prepared, &inst, &dist, seed, opts.seeds)?;
            let opt = optimum_json(&inst)?;
            let value = json!({
                "mode": "compact",
                "instance": name,
                "seed": seed,
                "report": report,
                "theta": prepared.theta(),
                "achieved": sweep_json(&sweep, opt.as_ref().map(|o| o.1)),
                "optimum": opt.map(|o| o.0),
            });
            Ok(Outcome::json(&value, true))
        }
        Mode::Pseudopoly => {
            let (inst, name) = load::<f64>(source, true)?;
            let dist = inst.require_distribution()?.clone();
            let cfg = PseudoConfig {
                steps: opts.steps,
                permissive: opts.permissive,
                ..PseudoConfig::default()
            };
            let prepared = prepare_pseudopoly(&inst, &dist, &cfg)?;
            let (rounding, sequence) = prepared.sample(seed)?;
            let values = (seed..seed + opts.seeds)
                .map(|s| {
                    let (_, seq) = prepared.sample(s)?;
                    Ok(smpsc_expected_value(&seq, &inst, &dist))
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            let opt = optimum_json(&inst)?;
            let value = json!({
                "mode": "pseudopoly",
                "instance": name,
                "seed": seed,
                "config": cfg,
                "lp": prepared.lp,
                "greedy": greedy_json(prepared.run.as_ref()),
                "fractional": greedy_json(prepared.fractional.as_ref()),
                "fractional_value": prepared.fractional.as_ref().map(|r| *r.value()),
                "rounding": rounding.to_json(),
                "sequence": sequence,
                "expected_value": smpsc_expected_value(&sequence, &inst, &dist),
                "achieved": sweep_json(&SeedSweep::from_values(&values), opt.as_ref().map(|o| o.1)),
                "optimum": opt.map(|o| o.0),
            });
            Ok(Outcome::json(&value, true))
        }
    }
}

fn smpsc_interval<S: Scalar>(source: &Source) -> Result<Outcome, Failure> {
    let (inst, name) = load::<S>(source, true)?;
    let dist = inst.require_distribution()?;
    let iv = interval_reduction(&inst, dist)?;
    let sol = solve_interval_bruteforce(&iv)?;
    let copies: Vec<Value> = sol
        .selected
        .iter()
        .map(|k| {
            let c = &iv.copies()[k];
            json!({ "item": c.item, "start": c.start, "end": c.end })
        })
        .collect();
    let opt = optimum_json(&inst)?;
    let sequence: &UniversalSequence = &sol.sequence;
    let value = json!({
        "mode": "interval-bruteforce",
        "instance": name,
        "arithmetic": arithmetic_name(S::EXACT),
        "copies": iv.copies().len(),
        "selected": copies,
        "copy_value": sol.value.render(),
        "sequence": sequence,
        "expected_value": sol.sequence_value.to_f64_lossy(),
        "expected_value_exact": sol.sequence_value.render(),
        "optimum": opt.map(|o| o.0),
    });
    Ok(Outcome::json(&value, true))
}
