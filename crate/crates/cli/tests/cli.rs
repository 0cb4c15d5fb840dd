use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qcoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcoin"))
        .args(args)
        .output()
        .expect("qcoin runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).lines().next().unwrap()).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn theory_high_f() {
    let out = qcoin(&["theory", "--theta", "0.7853981634", "--f", "0.9"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((num(&v, "eps_A_closed") - 0.17981).abs() < 1e-5);
    assert_eq!(v["regime"], "highF");
    assert!(stdout(&out).ends_with('\n'));
}

#[test]
fn theory_noiseless_orthogonal() {
    let v = json(&qcoin(&["theory", "--theta", "1.5707963268", "--f", "1.0"]));
    assert_eq!(num(&v, "eps_A_closed"), 0.0);
    assert_eq!(num(&v, "eps_B"), 0.5);
}

#[test]
fn theory_degrees_and_gamma() {
    let rad = stdout(&qcoin(&["theory", "--theta", "0.7853981633974483", "--f", "0.5", "--gamma", "0.001"]));
    let deg = stdout(&qcoin(&["theory", "--theta-deg", "45", "--f", "0.5", "--gamma", "0.001"]));
    assert_eq!(rad, deg);
    let v: Value = serde_json::from_str(&rad).unwrap();
    assert!((num(&v, "eps_A_theorem1") - (0.002f64).sqrt() / 0.5).abs() < 1e-12);
}

#[test]
fn theory_rejects_out_of_range() {
    let out = qcoin(&["theory", "--theta", "0", "--f", "0.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
    assert_eq!(code(&qcoin(&["theory", "--theta", "0.5", "--f", "1.2"])), 2);
    assert_eq!(code(&qcoin(&["theory", "--f", "0.5"])), 2);
    assert_eq!(code(&qcoin(&["theory", "--theta", "0.5", "--theta-deg", "30", "--f", "0.5"])), 2);
}

#[test]
fn oracle_agrees_with_closed_form() {
    for f in ["0.5", "0.9"] {
        let out = qcoin(&["oracle", "--theta", "0.7853981634", "--f", f, "--grid", "200", "--refine", "3"]);
        assert_eq!(code(&out), 0);
        let v = json(&out);
        assert!(num(&v, "abs_diff") <= 1e-3);
        for key in ["q_oracle", "s_x", "s_z", "eps_A_closed"] {
            assert!(v[key].is_number());
        }
    }
}

#[test]
fn oracle_rejects_coarse_grid() {
    assert_eq!(code(&qcoin(&["oracle", "--theta", "0.78", "--f", "0.5", "--grid", "10"])), 2);
}

const HONEST: &str = r#"{"params": {"theta": 0.7853981633974483, "f": 1.0, "n": 100}, "runs": 10}"#;

#[test]
fn simulate_honest_noiseless() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "honest.json", HONEST);
    let report = dir.path().join("report.json");
    let out = qcoin(&["simulate", "--config", &cfg, "--seed", "42", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let summary = stdout(&out);
    assert!(summary.starts_with("delta=0.000000 bias="), "{summary}");
    assert!(summary.contains("theory=0.000000"));
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["delta_hat"]["value"].as_f64(), Some(0.0));
    assert_eq!(v["master_seed"].as_u64(), Some(42));
}

#[test]
fn simulate_cheating_alice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "alice.json",
        r#"{"params": {"theta": 0.7853981633974483, "f": 0.9, "n": 100000},
            "alice": {"kind": "cheat_optimal", "target": "0"}, "runs": 20, "master_seed": 5}"#,
    );
    let out = qcoin(&["simulate", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let (lo, hi) = (num(&report["avg_bias"], "ci_low"), num(&report["avg_bias"], "ci_high"));
    assert!(lo <= 0.1798 && 0.1798 <= hi, "[{lo}, {hi}]");
    assert_eq!(report["pass_flags"]["bias_matches_theory"], true);
}

#[test]
fn simulate_inline_flags_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "honest.json", HONEST);
    let from_file = stdout(&qcoin(&["simulate", "--config", &cfg, "--seed", "3"]));
    let inline = stdout(&qcoin(&[
        "simulate", "--theta", "0.7853981633974483", "--f", "1", "--n", "100", "--runs", "10", "--seed", "3",
    ]));
    assert_eq!(from_file, inline);
}

#[test]
fn simulate_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let zero_n = write(dir.path(), "bad.json", r#"{"params": {"theta": 0.5, "f": 0.9, "n": 0}, "runs": 10}"#);
    assert_eq!(code(&qcoin(&["simulate", "--config", &zero_n])), 2);
    let garbage = write(dir.path(), "garbage.json", "{not json");
    assert_eq!(code(&qcoin(&["simulate", "--config", &garbage])), 2);
    assert_eq!(code(&qcoin(&["simulate", "--config", "/nonexistent/cfg.json"])), 2);
    let two_cheaters = ["simulate", "--theta", "0.5", "--f", "0.9", "--alice", "optimal", "--bob", "helstrom"];
    assert_eq!(code(&qcoin(&two_cheaters)), 2);
}

#[test]
fn simulate_all_aborted() {
    let out = qcoin(&["simulate", "--theta", "0.5", "--f", "0.5", "--gamma", "0", "--n", "50", "--runs", "3"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn simulate_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let path = dir.path().join(format!("r{threads}.json"));
        let out = qcoin(&[
            "simulate", "--theta", "0.7853981634", "--f", "0.9", "--n", "20000", "--runs", "12", "--alice",
            "optimal", "--seed", "11", "--threads", threads, "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        fs::read(path).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn simulate_writes_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let out = qcoin(&[
        "simulate", "--theta", "0.7", "--f", "0.9", "--n", "64", "--runs", "5", "--transcripts",
        path.to_str().unwrap(), "--rounds", "--out", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 5);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["rounds"].as_array().unwrap().len(), 64);
}

#[test]
fn single_coin_mode_from_flags() {
    let out = qcoin(&[
        "simulate", "--theta-deg", "60", "--f", "1", "--mode", "single-coin", "--alice", "optimal", "--runs",
        "100000", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["expected_bias"]["basis"], "unconditional");
    assert_eq!(report["pass_flags"]["bias_matches_theory"], true);
}

#[test]
fn sweep_theory_csv() {
    let out = qcoin(&[
        "sweep", "--theta", "0.7853981633974483", "--f", "0.5", "--axis", "f", "--values", "0,0.5,1,2",
        "--theory-only",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "axis_value,eps_A_closed,eps_A_oracle,eps_A_theorem1,eps_B,avg_bias_sim,avg_bias_se,delta_hat,runs,n,seed"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("0.5,0.323223"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f = 2"));
}

#[test]
fn sweep_with_simulation() {
    let out = qcoin(&[
        "sweep", "--theta", "0.7853981633974483", "--f", "0.9", "--gamma", "0.06", "--axis", "n", "--values",
        "1000,10000", "--runs", "10", "--seed", "4",
    ]);
    assert_eq!(code(&out), 0);
    for line in stdout(&out).lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(!cells[5].is_empty() && !cells[7].is_empty(), "{line}");
        assert_eq!(cells[10], "4");
    }
}

#[test]
fn selftest_passes() {
    let out = qcoin(&["selftest"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    let results: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(results.len(), 11);
    assert!(results.iter().all(|r| r["passed"] == true));
}

#[test]
fn selftest_catches_wrong_boundary() {
    let out = qcoin(&["selftest", "--inject-wrong-fstar"]);
    assert_eq!(code(&out), 1);
    let failed: Vec<i64> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|r| r["passed"] == false)
        .map(|r| r["id"].as_i64().unwrap())
        .collect();
    assert_eq!(failed, vec![2]);
}

#[test]
fn selftest_rejects_extra_arguments() {
    assert_eq!(code(&qcoin(&["selftest", "extra"])), 2);
    assert_eq!(code(&qcoin(&[])), 2);
}
