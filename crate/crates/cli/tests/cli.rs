use std::process::{Command, Output};

use serde_json::Value;

fn corrmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrmatch"))
        .args(args)
        .env_remove("CORRMATCH_WORKERS")
        .output()
        .expect("binary runs")
}

fn json_line(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "expected a single line, got {text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

#[test]
fn layout_counts_qubits() {
    let v = json_line(&corrmatch(&["layout", "--distance", "3"]));
    assert_eq!(v["distance"], 3);
    assert_eq!(v["data_qubits"].as_array().unwrap().len(), 13);
}

#[test]
fn trace_emits_a_graph() {
    let v = json_line(&corrmatch(&[
        "trace",
        "--distance",
        "3",
        "--mode",
        "fault_tolerant3d",
        "--p",
        "0.001",
        "--rounds",
        "2",
        "--basis",
        "z",
    ]));
    assert_eq!(v["basis"], "z");
    assert_eq!(v["layers"], 3);
    assert!(!v["edges"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_reports_counts() {
    let v = json_line(&corrmatch(&[
        "simulate",
        "--distance",
        "3",
        "--p",
        "0.03",
        "--trials",
        "5000",
        "--seed",
        "11",
        "--decoder",
        "correlated",
    ]));
    assert_eq!(v["trials"], 5000);
    assert_eq!(v["decoder"], "correlated");
    assert!(v["failures_x"].as_u64().unwrap() > 0);
    let (low, pl, high) = (
        v["ci_low"].as_f64().unwrap(),
        v["p_l"].as_f64().unwrap(),
        v["ci_high"].as_f64().unwrap(),
    );
    assert!(low < pl && pl < high);
}

#[test]
fn workers_flag_overrides_environment() {
    let args = [
        "simulate",
        "--distance",
        "3",
        "--p",
        "0.02",
        "--trials",
        "20000",
        "--seed",
        "5",
        "--mode",
        "fault_tolerant3d",
    ];
    let flagged = Command::new(env!("CARGO_BIN_EXE_corrmatch"))
        .args(args)
        .args(["--workers", "2"])
        .env("CORRMATCH_WORKERS", "0")
        .output()
        .unwrap();
    let from_env = Command::new(env!("CARGO_BIN_EXE_corrmatch"))
        .args(args)
        .env("CORRMATCH_WORKERS", "3")
        .output()
        .unwrap();
    let a = json_line(&flagged);
    let b = json_line(&from_env);
    assert_eq!(a["failures_x"], b["failures_x"]);
    assert_eq!(a["failures_z"], b["failures_z"]);
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = corrmatch(&[
        "sweep",
        "--distances",
        "3,5",
        "--ps",
        "0.02,0.04",
        "--trials",
        "2000",
        "--seed",
        "9",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mode,decoder,d,p,rounds,trials,failures_x,failures_z,p_l,ci_low,ci_high,seed"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("perfect2d,independent,3,0.02,1,2000,"));
    assert!(rows[3].starts_with("perfect2d,independent,5,0.04,1,2000,"));
}

#[test]
fn analytic_census_and_paths() {
    let v = json_line(&corrmatch(&["analytic", "--n", "4", "--distance", "4", "--p", "0.001"]));
    assert_eq!(v["ratio"], "3/2");
    assert!((v["ratio_basic_ideal"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let v = json_line(&corrmatch(&["census", "--n", "6", "--k", "3"]));
    assert_eq!(v["total"], 20 * 8);
    let v = json_line(&corrmatch(&["paths"]));
    assert_eq!(v["pair_paths"], 35);
    assert_eq!(v["crossover"], "1/23");
}

#[test]
fn configuration_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["simulate", "--distance", "3", "--p", "0.01", "--trials", "10"],
        &[
            "simulate",
            "--distance",
            "3",
            "--p",
            "0.6",
            "--trials",
            "10",
            "--seed",
            "1",
        ],
        &[
            "simulate",
            "--distance",
            "3",
            "--p",
            "0.01",
            "--trials",
            "0",
            "--seed",
            "1",
        ],
        &[
            "simulate",
            "--distance",
            "3",
            "--p",
            "0.01",
            "--trials",
            "10",
            "--seed",
            "1",
            "--mode",
            "bogus",
        ],
        &["analytic", "--distance", "5", "--p", "0.01"],
        &["layout", "--distance", "1"],
    ];
    for args in cases {
        let out = corrmatch(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
