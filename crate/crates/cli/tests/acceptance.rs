//! Acceptance criteria 1 to 10, one line each. Criteria run one after
//! another so the runtime budgets are measured without contention.

use std::path::Path;
use std::process::Command;

use taperflow_cli::suites::{run_criterion, CriterionOutcome};

const SEED: u64 = 20240601;

/// `verify --suite engine` twice with different worker counts; the CSV
/// outputs must match byte for byte.
fn binary_determinism(dir: &Path) -> Result<(), String> {
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.join(format!("threads-{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_taperflow"))
            .args(["verify", "--suite", "engine", "--seed", &SEED.to_string(), "--out"])
            .arg(&out)
            .env("TAPERFLOW_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!(
                "exit {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        let read = |f: &str| std::fs::read(out.join(f)).map_err(|e| e.to_string());
        outputs.push((read("results.csv")?, read("checks.csv")?));
    }
    if outputs[0] != outputs[1] {
        return Err("CSV outputs differ between 1 and 3 worker threads".into());
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    for id in 1..=10 {
        let mut o = run_criterion(id, SEED);
        if id == 10 {
            let r = binary_determinism(tmp.path());
            o.checks.push(taperflow_cli::suites::Check {
                name: "binary outputs identical across TAPERFLOW_THREADS".into(),
                passed: r.is_ok(),
                detail: r.err().unwrap_or_default(),
            });
        }
        println!("{}", o.summary_line());
        for c in o.failures() {
            println!("    failed: {}: {}", c.name, c.detail);
        }
        outcomes.push(o);
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
