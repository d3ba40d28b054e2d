//! CSV tables, JSON documents and run manifests.
//!
//! Every floating-point cell is written as `{:.16e}` (17 significant
//! digits), which round-trips `f64` exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use taperflow_core::montecarlo::{ConvergenceTable, ExperimentReport};

use crate::CliError;

/// Columns of every results table.
pub const RESULT_COLUMNS: [&str; 11] = [
    "case",
    "n",
    "t",
    "var_exact",
    "var_ratio",
    "W",
    "ks",
    "skew",
    "exkurt",
    "lyapunov",
    "seed",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One line of a results table. `var_ratio` is `Var Z_n(t) / W(t)` from
/// exact coefficients; the normality columns come from sampling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRow {
    pub case: u8,
    pub n: Option<u64>,
    pub t: Option<f64>,
    pub var_exact: Option<f64>,
    pub var_ratio: Option<f64>,
    pub w: Option<f64>,
    pub ks: Option<f64>,
    pub skew: Option<f64>,
    pub exkurt: Option<f64>,
    pub lyapunov: Option<f64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.case.to_string(),
            opt_u64(self.n),
            opt_f64(self.t),
            opt_f64(self.var_exact),
            opt_f64(self.var_ratio),
            opt_f64(self.w),
            opt_f64(self.ks),
            opt_f64(self.skew),
            opt_f64(self.exkurt),
            opt_f64(self.lyapunov),
            opt_u64(self.seed),
        ]
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::io)?;
    for r in rows {
        w.write_record(&r).map_err(CliError::io)?;
    }
    w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(&RESULT_COLUMNS, rows.iter().map(ResultRow::record))
}

/// A table with its own header, for outputs outside the results schema.
pub fn table_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    csv_bytes(header, rows)
}

/// One results row per `(n, t)`, with normality on the row of the tested
/// grid point and the Lyapunov value on the row `t = 1`.
pub fn report_rows(report: &ExperimentReport) -> Vec<ResultRow> {
    let cfg = &report.config;
    let mut rows = Vec::new();
    for size in &report.sizes {
        for p in &size.points {
            let norm = (p.t == size.normality_t).then_some(size.normality).flatten();
            rows.push(ResultRow {
                case: cfg.case.j(),
                n: Some(size.n),
                t: Some(p.t),
                var_exact: Some(p.var_exact),
                var_ratio: Some(p.var_ratio),
                w: Some(p.w),
                ks: norm.map(|x| x.ks),
                skew: norm.map(|x| x.skew),
                exkurt: norm.map(|x| x.exkurt),
                lyapunov: (p.t == 1.0).then_some(size.lyapunov),
                seed: Some(cfg.seed),
            });
        }
    }
    rows
}

/// Empirical second moments of a report.
pub fn moments_csv(report: &ExperimentReport) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for size in &report.sizes {
        for p in &size.points {
            rows.push(vec![
                size.n.to_string(),
                fmt_f64(p.t),
                fmt_f64(p.t),
                fmt_f64(p.var_z),
                fmt_f64(p.var_z_se),
                fmt_f64(p.var_exact_z),
                fmt_f64(p.w),
            ]);
        }
        for c in &size.covariances {
            rows.push(vec![
                size.n.to_string(),
                fmt_f64(c.s),
                fmt_f64(c.t),
                fmt_f64(c.cov_z),
                fmt_f64(c.cov_z_se),
                fmt_f64(c.cov_exact_z),
                fmt_f64(c.kernel),
            ]);
        }
    }
    table_csv(&["n", "s", "t", "empirical", "se", "exact", "limit"], rows)
}

pub fn convergence_rows(case: u8, table: &ConvergenceTable, seed: Option<u64>) -> Vec<ResultRow> {
    table
        .rows
        .iter()
        .map(|r| ResultRow {
            case,
            n: Some(r.n),
            t: Some(r.t),
            var_exact: r.var_exact,
            var_ratio: r.ratio,
            w: Some(r.w),
            seed,
            ..ResultRow::default()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

/// Writes files into a run directory and records their digests.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<OutputDigest>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<RunDir, CliError> {
        fs::create_dir_all(root).map_err(CliError::io)?;
        Ok(RunDir {
            root: root.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.root.join(name), bytes).map_err(CliError::io)?;
        self.outputs.push(OutputDigest {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json`, which lists every file written before it.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        manifest.outputs = self.outputs.clone();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Failure(e.to_string()))?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text).map_err(CliError::io)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        let x = 2.0 / 3.0;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn header_and_empty_cells() {
        let row = ResultRow {
            case: 2,
            n: Some(10),
            ..ResultRow::default()
        };
        let text = String::from_utf8(results_csv(&[row]).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULT_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "2,10,,,,,,,,,");
    }
}
