use std::path::Path;
use std::process::{Command, Output};

fn anticip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anticip"))
        .args(args)
        .env_remove("ANTICIP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let i = header.iter().position(|h| *h == name).expect("column present");
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn model_const_periodic_matches_golden() {
    let out = anticip(&["model", "--kind", "const-periodic", "--period", "4", "--y", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("model_const_periodic_4.csv"));
}

#[test]
fn model_rows_carry_expected_probabilities() {
    let out = anticip(&["model", "--kind", "const-periodic", "--period", "4", "--y", "1"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let pn: Vec<f64> = column(&stdout, "p_n").iter().map(|s| s.parse().unwrap()).collect();
    let want = [0.426777, 0.073223, 0.073223, 0.426777];
    assert_eq!(pn.len(), 4);
    for (a, b) in pn.iter().zip(want) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    let out = anticip(&["model", "--kind", "const-continuous", "--y", "1", "--n-max", "3"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let n = column(&stdout, "n");
    let pn = column(&stdout, "p_n");
    let row = n.iter().position(|v| v == "1").unwrap();
    let p1: f64 = pn[row].parse().unwrap();
    assert!((p1 - 0.405285).abs() < 1e-6);
    assert_eq!(n.len(), 6);
}

#[test]
fn csv_floats_have_seventeen_significant_digits() {
    let out = anticip(&["model", "--kind", "alt-periodic", "--period", "8", "--y", "0.5"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    for v in column(&stdout, "p_n") {
        let mantissa = v.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{v}");
    }
}

#[test]
fn exit_codes() {
    let degenerate = anticip(&["model", "--kind", "alt-periodic", "--period", "5", "--y", "1"]);
    assert_eq!(code(&degenerate), 2);
    assert!(String::from_utf8_lossy(&degenerate.stderr).contains("degenerates"));
    for args in [
        &["model", "--kind", "triangle", "--period", "4"][..],
        &["model", "--kind", "const-periodic"],
        &["model", "--kind", "const-periodic", "--period", "4", "--y", "2"],
        &["sample", "--period", "8", "--n", "9"],
        &["sample", "--period", "8", "--N", "4"],
        &["sample", "--period", "8", "--trials", "0"],
        &["sample", "--period", "8", "--dist", "gauss"],
        &["sample", "--cells", "8", "--r", "1"],
        &["sample", "--period", "8", "--epsilon", "1.5"],
        &["sample", "--period", "8", "--format", "xml"],
        &["verify", "--suite", "nothing"],
        &["bound", "--period", "4", "--points", "0,1", "--weights", "0.5,0.5"],
        &["frobnicate"],
        &[],
    ] {
        assert_eq!(code(&anticip(args)), 2, "{args:?}");
    }
    let ok = anticip(&["sample", "--period", "16", "--trials", "2000", "--n", "1", "--N", "0,4"]);
    assert_eq!(code(&ok), 0);
    let ok = anticip(&["verify", "--suite", "bounds", "--seed", "1"]);
    assert_eq!(code(&ok), 0);
    let ok = anticip(&["bound", "--period", "2", "--points", "0,3.141592653589793", "--weights", "0.5,0.5"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(code(&anticip(&["--help"])), 0);
}

#[test]
fn verification_failures_exit_one() {
    // evenly spread atoms of odd period fall below the frequency floor
    let third = 2.0 * std::f64::consts::PI / 3.0;
    let points = format!("0,{},{}", third, 2.0 * third);
    let w = 1.0 / 3.0;
    let weights = format!("{w},{w},{}", 1.0 - 2.0 * w);
    let out = anticip(&["bound", "--period", "3", "--points", &points, "--weights", &weights]);
    assert_eq!(code(&out), 1);
    let out = anticip(&["verify", "--suite", "statistics"]);
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("5,") && l.contains("FAIL")));
}

#[test]
fn sample_is_deterministic_and_thread_independent() {
    let args = [
        "sample", "--period", "64", "--dist", "uniform", "--trials", "3000", "--seed", "42", "--n",
        "1,32", "--N", "0,16", "--r", "1", "--epsilon", "0.1", "--format", "json",
    ];
    let a = anticip(&args);
    let b = anticip(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let threaded = Command::new(env!("CARGO_BIN_EXE_anticip"))
        .args(args)
        .env("ANTICIP_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);
    let mut flag = args.to_vec();
    flag.extend(["--threads", "1"]);
    assert_eq!(a.stdout, anticip(&flag).stdout);
}

#[test]
fn sample_json_schema() {
    let out = anticip(&[
        "sample", "--period", "16", "--trials", "500", "--seed", "9", "--n", "1", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["trials"], 500);
    assert_eq!(v["config"]["distribution"]["family"], "uniform");
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "size", "seed", "statistic", "trials", "mean", "variance", "std_error",
        "variance_std_error", "predicted_mean", "predicted_variance", "z_mean", "z_variance",
        "leading_order",
    ] {
        assert!(keys.contains(&k), "{k}");
    }
    assert_eq!(rows[1]["statistic"], "p_tot");
    assert!((rows[1]["predicted_mean"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn sample_csv_matches_golden() {
    let out = anticip(&[
        "sample", "--period", "16", "--dist", "two-point:1", "--trials", "1000", "--seed", "3",
        "--n", "1,8", "--N", "0,4",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("sample_two_point_16.csv"));
}

#[test]
fn table_law_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("law.csv");
    std::fs::write(&path, "lo,hi,mass\n-1,-1,0.25\n1,1,0.75\n").unwrap();
    let dist = format!("table:{}", path.display());
    let out_path = dir.path().join("out.csv");
    let out = anticip(&[
        "sample", "--period", "32", "--dist", &dist, "--trials", "4000", "--n", "1,2", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.starts_with("size,seed,statistic"));
    std::fs::write(&path, "a,b,c\n0,0,1\n").unwrap();
    assert_eq!(code(&anticip(&["sample", "--period", "8", "--dist", &dist])), 2);
}

#[test]
fn sweep_emits_one_row_per_size_and_statistic() {
    let out = anticip(&["sweep", "--period", "8,16,32", "--trials", "500", "--N", "1"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&stdout, "size"), ["8", "8", "16", "16", "32", "32"]);
    let out = anticip(&["sweep", "--cells", "8,16", "--trials", "500", "--N", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["sizes"], serde_json::json!([8, 16]));
    assert_eq!(v["results"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_identities_passes() {
    let out = anticip(&["verify", "--suite", "identities", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["criterion"].as_str().unwrap())
        .collect();
    for id in ["1", "2", "6", "parseval", "symmetry"] {
        assert!(ids.contains(&id), "{id}");
    }
}
