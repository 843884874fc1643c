//! End-to-end checks of the command-line interface: config parsing, JSON
//! report emission, assertion-driven exit codes, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gtsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gtsim"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn gtsim");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn counter_example_config_passes_exactly() {
    let out = run_ok(gtsim()
        .arg("simulate")
        .arg("--config")
        .arg(repo_config("counter-example.toml")));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["report"]["distribution"][0][1], 0.6);
}

#[test]
fn failing_assertion_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        r#"
experiment = "counter-example"
n-steps = 3
p-last = 0.4

[assert]
distribution = [[-1.0, 0.5], [1.0, 0.5]]
"#,
    )
    .unwrap();
    let out = gtsim()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .output()
        .expect("spawn gtsim");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lower_bound_with_small_override_passes() {
    let out = run_ok(gtsim()
        .arg("simulate")
        .arg("--config")
        .arg(repo_config("lower-bound.toml"))
        .arg("--reps")
        .arg("400"));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(doc["reps"], 400);
    assert_eq!(doc["pass"], true);
}

#[test]
fn lln_blocks_config_passes() {
    let out = run_ok(gtsim()
        .arg("lln")
        .arg("--config")
        .arg(repo_config("lln-blocks.toml"))
        .arg("--reps")
        .arg("500"));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["report"]["threshold"], 128.0);
}

#[test]
fn enumerate_subcommand_passes() {
    let out = run_ok(gtsim()
        .arg("enumerate")
        .arg("--n-steps")
        .arg("3")
        .arg("--sceptics")
        .arg("10"));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(doc["pass"], true);
}

#[test]
fn bounds_subcommand_prints_value() {
    let out = run_ok(gtsim()
        .arg("bounds")
        .arg("regret-threshold")
        .arg("--k")
        .arg("7")
        .arg("--n")
        .arg("1000")
        .arg("--eps")
        .arg("0.1"));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    let v = doc["value"].as_f64().unwrap();
    assert!((v - 253.92).abs() < 0.01);

    // out-of-range parameters report an error and exit 2
    let out = gtsim()
        .arg("bounds")
        .arg("regret-threshold")
        .arg("--k")
        .arg("7")
        .arg("--n")
        .arg("1000")
        .arg("--eps")
        .arg("0.9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lp_check_reports_zero_gap() {
    let out = run_ok(gtsim().arg("lp-check").arg(repo_config("lp-instance.json")));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    assert_eq!(doc["pass"], true);
    assert!((doc["primal_objective"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(doc["gap"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn market_demo_replays_stream() {
    let out = run_ok(gtsim().arg("market-demo").arg(repo_config("orders.csv")));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("order_seq,event,maker_id,price,qty"));
    // the sell market order fills 3 @ 0.6 then 2 @ 0.5
    assert!(text.contains("2,fill,0,0.6,3"));
    assert!(text.contains("2,fill,1,0.5,2"));
    // the resting sell at 0.7 expires at timestamp 10
    assert!(text.contains("expired"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        run_ok(gtsim()
            .arg("simulate")
            .arg("--config")
            .arg(repo_config("theorem-optimal-honest.toml"))
            .arg("--reps")
            .arg("50")
            .arg("--out")
            .arg(path));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
