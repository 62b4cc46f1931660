use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_submod-knapsack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixture_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("kpuc.json");
    let out = run(&["fixture", "kpuc89", "--out", path_arg(&file)]);
    assert_eq!(code(&out), 0);
    let out = run(&["verify", "--instance", path_arg(&file)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["arithmetic"], "exact");
}

#[test]
fn broken_table_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    // f({0,1}) < f({0}) breaks monotonicity
    let text = r#"{"items":[{"size":1},{"size":2}],"function":{"kind":"table","values":["0","3","1","2"]}}"#;
    std::fs::write(&file, text).unwrap();
    let out = run(&["verify", "--instance", path_arg(&file)]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["pass"], false);
    let axioms = v["report"]["axioms"].as_array().unwrap();
    assert!(axioms.iter().any(|a| a["pass"] == false && !a["witness"].is_null()));
}

#[test]
fn unreadable_input_is_a_usage_error() {
    assert_eq!(code(&run(&["verify", "--instance", "/no/such/file.json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("garbage.json");
    std::fs::write(&file, "{ not json").unwrap();
    assert_eq!(code(&run(&["verify", "--instance", path_arg(&file)])), 2);
    assert_eq!(code(&run(&["verify", "--fixture", "kpuc89", "--instance", path_arg(&file)])), 2);
    assert_eq!(code(&run(&["verify"])), 2);
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["hardness", "--fixture", "nonsense"])), 2);
}

#[test]
fn robustness_reports_worst_ratio_and_floor() {
    let out = run(&["robustness", "--fixture", "kpuc89", "--policy", "alg2"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("capacity,value,opt,ratio\n"));
    assert!(csv.contains("worst_case,,,3/4\n"), "{csv}");
    assert!(csv.contains("theorem_floor,,,0.316060279414\n"), "{csv}");

    let out = run(&["robustness", "--fixture", "kpuc89", "--policy", "alg4", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["meets_floor"], true);
    assert!(v["theorem_floor"].as_f64().unwrap() > 0.1105);

    let out = run(&["robustness", "--fixture", "kpuc89", "--policy", "alg3", "--capacities", "4,5", "--format", "json"]);
    assert_eq!(json(&out)["rows"].as_array().unwrap().len(), 2);
    assert_eq!(code(&run(&["robustness", "--fixture", "kpuc89", "--policy", "alg7"])), 2);
    assert_eq!(code(&run(&["robustness", "--fixture", "kpuc89", "--policy", "alg1", "--capacities", "x..y"])), 2);
}

#[test]
fn hardness_constants() {
    let v = json(&run(&["hardness", "--fixture", "kpuc89"]));
    assert_eq!(v["constants"][0]["achieved_exact"], "8/9");
    assert_eq!(v["pass"], true);
    let out = run(&["hardness", "--fixture", "unit_sqrt5"]);
    assert_eq!(code(&out), 0);
    for row in json(&out)["constants"].as_array().unwrap() {
        assert!(row["abs_error"].as_f64().unwrap() <= 1e-12);
    }
    let v = json(&run(&["hardness", "--fixture", "geometric(4,4)"]));
    assert_eq!(v["constants"][0]["bound"], "3/4");
    assert_eq!(v["pass"], true);
}

#[test]
fn capability_limits_exit_three() {
    assert_eq!(code(&run(&["verify", "--fixture", "geometric(4,30)"])), 3);
    assert_eq!(code(&run(&["smpsc", "--fixture", "integrality_gap(20)", "--mode", "interval-bruteforce"])), 3);
}

#[test]
fn smpsc_interval_matches_the_optimum() {
    let v = json(&run(&["smpsc", "--fixture", "kpuc89", "--mode", "interval-bruteforce"]));
    assert_eq!(v["arithmetic"], "exact");
    assert_eq!(v["expected_value_exact"], "37/9");
    assert_eq!(v["optimum"]["value_exact"], "37/9");
}

#[test]
fn smpsc_randomized_modes_need_a_seed() {
    for mode in ["compact", "pseudopoly"] {
        assert_eq!(code(&run(&["smpsc", "--fixture", "kpuc89", "--mode", mode])), 2);
    }
    assert_eq!(code(&run(&["smpsc", "--fixture", "kpuc89", "--mode", "compact", "--seed", "1", "--arith", "exact"])), 2);
    // no capacity distribution
    assert_eq!(code(&run(&["smpsc", "--fixture", "unit_sqrt5", "--mode", "compact", "--seed", "1"])), 2);
}

#[test]
fn smpsc_compact_sweep() {
    let out = run(&["smpsc", "--fixture", "kpuc89", "--mode", "compact", "--eps", "0.1", "--seed", "1", "--seeds", "100"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["achieved"]["sweep"]["seeds"], 100);
    assert_eq!(v["achieved"]["meets_floor"], true);
    assert_eq!(v["achieved"]["floor"], 0.03);
}

#[test]
fn smpsc_pseudopoly_on_the_gap_instance() {
    let v = json(&run(&["smpsc", "--fixture", "integrality_gap(5)", "--mode", "pseudopoly", "--seed", "7"]));
    assert!(v["fractional_value"].as_f64().unwrap() >= 0.9 * (3.0 - 0.2));
    assert_eq!(v["optimum"]["value_exact"], "1");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (k, args) in [
        vec!["smpsc", "--fixture", "kpuc89", "--mode", "compact", "--seed", "11", "--seeds", "20"],
        vec!["smpsc", "--fixture", "integrality_gap(4)", "--mode", "pseudopoly", "--seed", "5", "--seeds", "5"],
        vec!["robustness", "--fixture", "kpuc89", "--policy", "alg4", "--format", "json"],
    ]
    .into_iter()
    .enumerate()
    {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
        let file = dir.path().join(format!("{k}.json"));
        let mut with_out = args.clone();
        with_out.extend(["--out", path_arg(&file)]);
        assert_eq!(code(&run(&with_out)), 0);
        assert_eq!(std::fs::read(&file).unwrap(), a.stdout);
    }
}
