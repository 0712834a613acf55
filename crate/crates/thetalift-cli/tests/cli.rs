use std::process::{Command, Output};

use serde_json::Value;

fn thetalift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetalift")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn discriminant_of_a1() {
    let out = thetalift(&["lattice", "disc", "A1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["orders"], serde_json::json!([2]));
    assert_eq!(v["q"], serde_json::json!(["1/4"]));
}

#[test]
fn lattice_file_input() {
    let dir = std::env::temp_dir().join(format!("thetalift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a2.json");
    std::fs::write(&path, r#"{"name": "A2", "gram": [[2, -1], [-1, 2]]}"#).unwrap();
    let out = thetalift(&["lattice", "info", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["rank"], 2);
    assert_eq!(v["disc_order"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_tau_is_a_usage_error() {
    let out = thetalift(&["theta", "eval", "--lattice", "A1", "--tau", "[[0,1],[0,0]]"]);
    assert_eq!(out.status.code(), Some(2));
    let out = thetalift(&["theta", "eval", "--lattice", "A1", "--tau", "[[0,-1],[0,0],[0,1]]"]);
    assert_eq!(out.status.code(), Some(2));
    let out = thetalift(&["lattice", "info", "NotALattice"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn theta_eval_reports_truncation() {
    let out = thetalift(&["theta", "eval", "--lattice", "A1", "--tau", "[[0,1],[0,0],[0,1]]", "--eps", "1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["values"].as_array().unwrap().len(), 4);
    assert!(v["tail_estimate"].as_f64().unwrap() < 1e-10);
    // Θ_{A1,2}(iI₂) at the trivial coset is (Σ e^{−πn²})² > 1.
    assert!(v["values"][0][0].as_f64().unwrap() > 1.0);
}

#[test]
fn weil_matrix_is_unitary_shape() {
    let out = thetalift(&["weil", "matrix", "--lattice", "A2", "--word", "S", "--genus", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dim"], 3);
    let out = thetalift(&["weil", "matrix", "--lattice", "A1", "--word", "T[[1,0],[0,0]]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["dim"], 4);
}

#[test]
fn verify_milgram_passes_and_is_deterministic() {
    let a = thetalift(&["--deterministic", "verify", "milgram"]);
    let b = thetalift(&["--deterministic", "verify", "milgram"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v.as_array().unwrap().iter().all(|r| r["passed"] == true && r["wall_time"] == 0.0));
}

#[test]
fn local_checks_and_prime_two() {
    let out = thetalift(&["local", "split-check", "E8", "--p", "5", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["splits"], true);
    let out = thetalift(&["local", "split-check", "E8", "--p", "2", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "structural/unverified");
}

#[test]
fn k3_check_and_range() {
    let out = thetalift(&["k3-check", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["parameters"]["rank"], 17);
    assert_eq!(thetalift(&["k3-check", "--d", "51"]).status.code(), Some(2));
}

#[test]
fn unknown_suite_is_rejected() {
    assert_eq!(thetalift(&["verify", "no-such-suite"]).status.code(), Some(2));
}
