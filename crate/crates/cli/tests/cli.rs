use std::fs;
use std::process::{Command, Output};

fn taperflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taperflow"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn constant_example() {
    let o = taperflow(&["constants", "--id", "21", "--c", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    // C21(c) = c² - c³/3 for c <= 1
    assert!((v - 5.0 / 24.0).abs() <= 1e-16);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(taperflow(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(taperflow(&["constants"]).status.code(), Some(1));
    assert_eq!(taperflow(&["constants", "--id", "6"]).status.code(), Some(1));
    assert_eq!(
        taperflow(&["verify", "--suite", "nope", "--seed", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(taperflow(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_reports_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"case": 2, "beta": 0.75, "gamma1": 0.5, "n": [100, 0], "t": [1], "seed": 1}"#,
    )
    .unwrap();
    let o = taperflow(&["check-config", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("beta"), "{err}");
    assert!(err.contains("n[1]"), "{err}");
}

#[test]
fn soft_tapering_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("soft.json");
    fs::write(
        &path,
        r#"{"case": 2, "beta": 2, "gamma1": 0.5, "innovation": {"alpha": 1.5, "gamma": 0.9},
            "n": [100], "t": [1], "seed": 1}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = taperflow(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of scope"));
    assert!(!out.exists());
}

#[test]
fn simulate_writes_a_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(
        &path,
        r#"{"case": 8, "beta": 2, "innovation": {"alpha": 1.2, "gamma": 0.5},
            "n": [500], "t": [0.5, 1], "reps": 200, "seed": 9}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = taperflow(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--paths",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "config.json",
        "report.json",
        "results.csv",
        "moments.csv",
        "partial_sums.csv",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 5);
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
    assert_eq!(
        fs::read_to_string(out.join("partial_sums.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 200 * 2
    );

    // the saved report reproduces the results table
    let o = taperflow(&["report", "--input", out.join("report.json").to_str().unwrap()]);
    assert_eq!(stdout(&o), results);

    // and a second run is byte-identical
    let again = dir.path().join("again");
    taperflow(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(out.join("results.csv")).unwrap(),
        fs::read(again.join("results.csv")).unwrap()
    );
}

#[test]
fn exact_var_and_lyapunov_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(
        &path,
        r#"{"case": 7, "beta": 0.75, "n": [1000, 10000], "t": [0.5, 1, 2], "seed": 1}"#,
    )
    .unwrap();
    let o = taperflow(&["exact-var", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!((last[4].parse::<f64>().unwrap() - 1.0).abs() < 0.05);
    let o = taperflow(&["lyapunov", "--config", path.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let l: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["lyapunov"].as_f64().unwrap())
        .collect();
    assert!(l[1] < l[0]);
}

#[test]
fn limit_sim_case_11_is_linear() {
    let o = taperflow(&[
        "limit-sim",
        "--case",
        "11",
        "--gamma1",
        "1.5",
        "--grid",
        "0.5,1,2",
        "--paths",
        "3",
        "--seed",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for p in rows.chunks(3) {
        let slope = p[0][2] / p[0][1];
        assert!(p.iter().all(|r| (r[2] / r[1] - slope).abs() <= 1e-10 * slope.abs()));
    }
}

#[test]
fn verify_coefficients_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = taperflow(&[
        "verify",
        "--suite",
        "coefficients",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS [1]"));
    assert!(dir.path().join("checks.csv").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_taperflow"))
        .args(["constants", "--id", "21"])
        .env("TAPERFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
