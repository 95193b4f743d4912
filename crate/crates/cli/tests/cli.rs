use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn polysymp(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polysymp"));
    cmd.args(args).env_remove("POLYSYMP_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(kind: &str, dir: &Path, body: &str, extra: &[&str]) -> (i32, PathBuf) {
    let config = write_config(dir, &format!("{kind}.cfg.json"), body);
    let prefix = dir.join(kind);
    let mut args = vec![kind, "--config", config.to_str().unwrap(), "--out", prefix.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = polysymp(&args, &[]);
    (out.status.code().unwrap(), prefix)
}

fn report(prefix: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap()
}

const COUNTEREXAMPLE: &str = r#"{
  "multivector": {"dim": 4, "grade": 2, "terms": [
    {"indices": [0, 1], "coefficient": 1.0},
    {"indices": [2, 3], "coefficient": 1.0}
  ]},
  "expect_decomposable": false
}"#;

#[test]
fn counterexample_is_reported_indecomposable() {
    let dir = TempDir::new().unwrap();
    let (code, prefix) = run("decompose", dir.path(), COUNTEREXAMPLE, &[]);
    assert_eq!(code, 0);
    let r = report(&prefix);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["details"]["decomposable"], false);
    assert_eq!(r["details"]["annihilator_dim"], 0);
}

#[test]
fn failed_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    let body = COUNTEREXAMPLE.replace("\"expect_decomposable\": false", "\"expect_decomposable\": true");
    let (code, prefix) = run("decompose", dir.path(), &body, &[]);
    assert_eq!(code, 1);
    assert_eq!(report(&prefix)["summary"]["passed"], 0);
}

#[test]
fn decomposable_input_reconstructs() {
    let dir = TempDir::new().unwrap();
    // (e0 + e1) ∧ e2 = e0∧e2 + e1∧e2
    let body = r#"{"multivector": {"dim": 3, "grade": 2, "terms": [
        {"indices": [0, 2], "coefficient": 1.0}, {"indices": [1, 2], "coefficient": 1.0}]},
        "expect_decomposable": true}"#;
    let (code, prefix) = run("decompose", dir.path(), body, &[]);
    assert_eq!(code, 0);
    let r = report(&prefix);
    assert_eq!(r["results"][1]["name"], "reconstruction");
    assert_eq!(r["details"]["annihilator_dim"], 2);
}

#[test]
fn hamvec_sweep_passes_every_point() {
    let dir = TempDir::new().unwrap();
    let (code, prefix) = run("verify-hamvec", dir.path(), r#"{"shape": {"n": 2, "N": 1}, "seed": 7, "points": 100}"#, &[]);
    assert_eq!(code, 0);
    let r = report(&prefix);
    assert_eq!(r["summary"]["total"], 100);
    assert_eq!(r["summary"]["passed"], 100);
}

#[test]
fn kg_run_reports_second_order_and_csv() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"wave": {"modes": [1]}, "grid": {"nx": 32, "t_final": 0.5}, "resolutions": [32, 64]}"#;
    let (code, prefix) = run("run-kg", dir.path(), body, &[]);
    assert_eq!(code, 0);
    let order = report(&prefix)["details"]["convergence_order"].as_f64().unwrap();
    assert!(order >= 1.9, "{order}");
    let csv = fs::read_to_string(dir.path().join("run-kg.nx32.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,phi,pi_t,pi_x,energy"));
    // 32 levels in time (0.5 / (π/32) rounded) plus the initial one
    assert_eq!(lines.count(), 32 * 6);
}

#[test]
fn lift_and_hamilton_jacobi_runs_pass() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"wave": {"modes": [1]}, "grid": {"nx": 32, "t_final": 0.5}, "resolutions": [32, 64]}"#;
    assert_eq!(run("prop2", dir.path(), body, &[]).0, 0);
    let body = r#"{"wave": {"modes": [1]}, "grid": {"nx": 32, "t_final": 0.5}, "points": 20}"#;
    assert_eq!(run("check-hj", dir.path(), body, &[]).0, 0);
    let body = r#"{"shape": {"n": 4, "N": 1}, "wave": {"modes": [1, 0, 2]}, "points": 20}"#;
    assert_eq!(run("check-hj", dir.path(), body, &[]).0, 0);
}

#[test]
fn no_go_sweep_agrees() {
    let dir = TempDir::new().unwrap();
    let (code, prefix) = run("no-go", dir.path(), r#"{"seed": 5, "potentials": 10}"#, &[]);
    assert_eq!(code, 0);
    let r = report(&prefix);
    assert_eq!(r["summary"]["total"], 60);
    assert!(r["details"]["verdicts"]["inconsistent"].as_u64().unwrap() > 0);
}

#[test]
fn reports_are_byte_stable_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"shape": {"n": 3, "N": 2}, "seed": 9, "points": 40}"#);
    let mut bytes = Vec::new();
    for threads in ["1", "4"] {
        let prefix = dir.path().join(format!("t{threads}"));
        let args = ["verify-hamvec", "--config", config.to_str().unwrap(), "--out", prefix.to_str().unwrap()];
        assert_eq!(polysymp(&args, &[("POLYSYMP_THREADS", threads)]).status.code(), Some(0));
        bytes.push(fs::read(prefix.with_extension("json")).unwrap());
        let timing: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(format!("t{threads}.timing.json"))).unwrap()).unwrap();
        assert!(timing["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"shape": {"n": 1, "N": 1}, "seed": 1, "points": 5}"#;
    let (_, a) = run("verify-hamvec", dir.path(), body, &["--seed", "42"]);
    assert_eq!(report(&a)["config"]["seed"], 42);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run("no-go", dir.path(), "{not json", &[]).0, 2);
    assert_eq!(run("decompose", dir.path(), r#"{"kind": "no-go"}"#, &[]).0, 2);
    assert_eq!(run("verify-hamvec", dir.path(), r#"{"points": 3}"#, &[]).0, 2);
    assert_eq!(run("no-go", dir.path(), r#"{"tolerances": {"inconsistent_residual": 0}}"#, &[]).0, 2);
    let unstable = r#"{"wave": {"modes": [1]}, "grid": {"nx": 32, "courant": 1.5, "t_final": 0.5}}"#;
    assert_eq!(run("run-kg", dir.path(), unstable, &[]).0, 2);

    let missing = dir.path().join("absent.json");
    let out = polysymp(&["no-go", "--config", missing.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));

    let config = write_config(dir.path(), "ok.json", "{}");
    let prefix = dir.path().join("x");
    let args = ["no-go", "--config", config.to_str().unwrap(), "--out", prefix.to_str().unwrap()];
    assert_eq!(polysymp(&args, &[("POLYSYMP_THREADS", "zero")]).status.code(), Some(2));
    assert_eq!(polysymp(&["bogus-kind", "--config", "x"], &[]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_internal_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let config = write_config(dir.path(), "c.json", COUNTEREXAMPLE);
    let prefix = blocker.join("sub").join("out");
    let out = polysymp(&["decompose", "--config", config.to_str().unwrap(), "--out", prefix.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
}
