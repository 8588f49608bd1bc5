use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polygamy::states::{fmt_f64, isotropic_mixture, save_state, w3, PureState, State};
use polygamy_cli::reproduce::example2_state;
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polygamy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn write_state(dir: &Path, name: &str, state: impl Into<State>) -> PathBuf {
    let path = dir.join(name);
    save_state(&state.into(), &path).unwrap();
    path
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn measure_w3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_state(dir.path(), "w3.json", w3());
    let out = bin(&[
        "measure",
        "--state",
        p.to_str().unwrap(),
        "--focus",
        "0",
        "--kind",
        "concurrence",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["global"].as_f64().unwrap() - 0.9428090).abs() < 1e-7);
    for pair in v["pairs"].as_array().unwrap() {
        assert!((pair.as_f64().unwrap() - 0.6666667).abs() < 1e-7);
    }
    assert_eq!(v["approximate"], Value::Bool(false));
}

#[test]
fn measure_product_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut amps = vec![0.0; 8];
    amps[0] = 1.0;
    let p = write_state(
        dir.path(),
        "prod.json",
        PureState::from_real(&amps).unwrap(),
    );
    for kind in ["concurrence", "coa", "eof"] {
        let out = bin(&["measure", "--state", p.to_str().unwrap(), "--kind", kind]);
        let v = json(&out);
        assert_eq!(v["global"].as_f64().unwrap(), 0.0);
        assert!(v["pairs"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64().unwrap() == 0.0));
    }
}

#[test]
fn measure_csv_and_mixed_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_state(
        dir.path(),
        "mix.json",
        isotropic_mixture(0.9, &w3()).unwrap(),
    );
    let out = bin(&[
        "measure",
        "--state",
        p.to_str().unwrap(),
        "--restarts",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,value\nglobal,"));
    assert!(text.contains("pair_0_1,") && text.contains("pair_0_2,"));
    let out = bin(&["measure", "--state", p.to_str().unwrap(), "--restarts", "4"]);
    assert_eq!(json(&out)["approximate"], Value::Bool(true));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"kind\": \"pure\", ").unwrap();
    let out = bin(&["measure", "--state", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("missing.json");
    assert_eq!(
        bin(&["measure", "--state", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let p = write_state(dir.path(), "w3.json", w3());
    let out = bin(&["measure", "--state", p.to_str().unwrap(), "--focus", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        bin(&["figure", "2", "--grid", "1:0:0.1"]).status.code(),
        Some(2)
    );
}

#[test]
fn thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let w = write_state(dir.path(), "w3.json", w3());
    let e2 = write_state(dir.path(), "e2.json", example2_state().unwrap());
    let run = |p: &Path, which: &str, kind: &str| {
        let out = bin(&[
            "threshold",
            "--state",
            p.to_str().unwrap(),
            "--which",
            which,
            "--kind",
            kind,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        json(&out)
    };
    let v = run(&e2, "alpha0", "concurrence");
    assert!((v["threshold"].as_f64().unwrap() - 0.783586).abs() < 1e-5);
    assert_eq!(v["kind"], "alpha0_c");
    let v = run(&w, "alpha1", "eof");
    assert!((v["threshold"].as_f64().unwrap() - 1.35244).abs() < 1e-4);
    assert_eq!(v["sign_changes"], 1);
    let v = run(&w, "alpha0", "eof");
    assert!((v["threshold"].as_f64().unwrap() - 1.15959).abs() < 1e-4);
    let v = run(&w, "beta0", "concurrence");
    assert!((v["threshold"].as_f64().unwrap() - 1.70951).abs() < 1e-4);
    assert_eq!(v["kind"], "beta0");
}

#[test]
fn example_exit_code_tracks_table() {
    for which in ["1", "2", "3"] {
        let out = bin(&["example", which, "--format", "json"]);
        let v = json(&out);
        let all = v["all_pass"].as_bool().unwrap();
        assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
    }
    let v = json(&bin(&["example", "1", "--format", "json"]));
    let row = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == "alpha0, t=1")
        .unwrap();
    assert_eq!(row["pass"], Value::Bool(true));
    assert_eq!(bin(&["example", "3"]).status.code(), Some(0));
    assert_eq!(bin(&["example", "4"]).status.code(), Some(2));
}

#[test]
fn figure_data() {
    let f1 = String::from_utf8(bin(&["figure", "1"]).stdout).unwrap();
    assert!(f1.starts_with("t,alpha0\n"));
    let last = rows(&f1).pop().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 1.70951).abs() < 1e-4);

    let f2 = rows(&String::from_utf8(bin(&["figure", "2"]).stdout).unwrap());
    assert_eq!(f2.len(), 501);
    assert_eq!(f2[0], vec![0.0, 1.0, 2.0]);

    let f4 = rows(&String::from_utf8(bin(&["figure", "4"]).stdout).unwrap());
    let before = f4.iter().rfind(|r| r[0] < 1.35244).unwrap();
    let after = f4.iter().find(|r| r[0] > 1.35244).unwrap();
    assert!(before[1] - before[2] < 0.0 && after[1] - after[2] > 0.0);
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let out = bin(&["figure", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("alpha,lhs,rhs\n") && !text.contains('\r'));
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            assert_eq!(fmt_f64(field.parse().unwrap()), field);
        }
    }
}

#[test]
fn sweep_matches_figure() {
    let dir = tempfile::tempdir().unwrap();
    let w = write_state(dir.path(), "w3.json", w3());
    let sweep = bin(&["sweep", "--state", w.to_str().unwrap(), "--kind", "eof"]);
    assert_eq!(sweep.stdout, bin(&["figure", "4"]).stdout);
}

#[test]
fn verify_small_and_empty() {
    let out = bin(&["verify", "--ensemble", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_passed"], Value::Bool(true));

    let args = [
        "verify",
        "--ensemble",
        "40",
        "--oracle",
        "--oracle-states",
        "10",
        "--seed",
        "7",
    ];
    let a = bin(&args);
    assert_eq!(a.status.code(), Some(0));
    let v = json(&a);
    assert_eq!(v["suites"]["oracle_min_vs_wootters"]["passed"], 10);
    assert_eq!(a.stdout, bin(&args).stdout);
}
