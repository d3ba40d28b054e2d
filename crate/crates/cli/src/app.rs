//! Subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use taperflow_core::gaussian_limits::{fbm_covariance, GaussianGridProcess};
use taperflow_core::limit_theory::{hurst, limit_constant, Hurst};
use taperflow_core::montecarlo::{
    convergence_table, partial_sum_draws, run_experiment, ExperimentConfig, ExperimentReport,
};
use taperflow_core::{CaseId, LimitLaw};

use crate::config::{config_to_value, parse_config};
use crate::output::{
    convergence_rows, fmt_f64, moments_csv, report_rows, results_csv, table_csv, ResultRow, RunDir, RunManifest,
};
use crate::suites::{self, Suite};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "taperflow", version, about = "Partial sums of tapered linear processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded Monte Carlo experiment into a run directory.
    Simulate(SimulateArgs),
    /// Evaluate limit constants, W(t) or the Hurst exponent.
    Constants(ConstantsArgs),
    /// Exact Var Z_n(t) / W(t) over the configured sizes; no sampling.
    ExactVar(TableArgs),
    /// Lyapunov fractions at t = 1 over the configured sizes.
    Lyapunov(TableArgs),
    /// Sample the Gaussian limit process on a grid.
    LimitSim(LimitSimArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Print the results table of a saved report.
    Report(ReportArgs),
    /// Validate a configuration file and print its canonical form.
    CheckConfig(ConfigArg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write every replication's partial sums.
    #[arg(long)]
    pub paths: bool,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// 1 to 23, `W` or `H`.
    #[arg(long)]
    pub id: String,
    /// Evaluation times; repeat for several.
    #[arg(long, default_value = "1")]
    pub t: Vec<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Case for `W` and `H`.
    #[arg(long)]
    pub case: Option<u8>,
    /// Filter-length exponent for `W`; defaults to 1 when the case is
    /// moderately tapered.
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LimitSimArgs {
    /// Limit process of this case.
    #[arg(long, conflicts_with = "fbm", required_unless_present = "fbm")]
    pub case: Option<u8>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Fractional Brownian motion with this Hurst index.
    #[arg(long)]
    pub fbm: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long)]
    pub seed: u64,
    /// Run directory for checks.csv, results.csv and manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

pub fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, argv),
        Command::Constants(a) => constants(a),
        Command::ExactVar(a) => exact_var(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::LimitSim(a) => limit_sim(a),
        Command::Verify(a) => verify(a, argv),
        Command::Report(a) => report(a),
        Command::CheckConfig(a) => {
            let cfg = load_config(&a.config)?;
            print!("{}", crate::config::serialize_config(&cfg));
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(CliError::io),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(CliError::io)
        }
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Failure(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn manifest(argv: &[String], config: Value, seed: Option<u64>, started: String) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: argv.to_vec(),
        config,
        seed,
        threads: rayon::current_num_threads(),
        started,
        finished: now(),
        outputs: Vec::new(),
    }
}

fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let started = now();
    let cfg = load_config(&a.config)?;
    let report = run_experiment(&cfg)?;
    let mut dir = RunDir::create(&a.out)?;
    dir.write_json("config.json", &config_to_value(&cfg))?;
    dir.write_json("report.json", &report)?;
    dir.write("results.csv", &results_csv(&report_rows(&report))?)?;
    dir.write("moments.csv", &moments_csv(&report)?)?;
    if a.paths {
        let mut rows = Vec::new();
        for (i, &n) in cfg.n_list.iter().enumerate() {
            let (_, draws) = partial_sum_draws(&cfg, i)?;
            for (rep, sums) in draws.iter().enumerate() {
                for (t, s) in cfg.t_grid.iter().zip(sums) {
                    rows.push(vec![n.to_string(), rep.to_string(), fmt_f64(*t), fmt_f64(*s)]);
                }
            }
        }
        dir.write("partial_sums.csv", &table_csv(&["n", "rep", "t", "s"], rows)?)?;
    }
    for size in &report.sizes {
        println!(
            "n={} lambda={} presample={:?} Var Z(t)/W(t) exact: {}",
            size.n,
            size.lambda,
            size.presample,
            size.points
                .iter()
                .map(|p| format!("{:.4}", p.var_ratio))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    dir.finish(manifest(argv, config_to_value(&cfg), Some(cfg.seed), started))?;
    Ok(())
}

fn default_gamma1(case: CaseId) -> Result<f64, CliError> {
    match case.regime() {
        taperflow_core::FilterTaper::Moderate => Ok(1.0),
        _ => Err(CliError::Validation(format!(
            "--gamma1 is required for case {}",
            case.j()
        ))),
    }
}

fn constants(a: &ConstantsArgs) -> Result<(), CliError> {
    let beta = a.beta.unwrap_or(f64::NAN);
    let case = || -> Result<CaseId, CliError> {
        let j = a
            .case
            .ok_or_else(|| CliError::Validation(format!("--case is required for --id {}", a.id)))?;
        Ok(CaseId::new(j)?)
    };
    let flat_beta = |c: CaseId| if c.j() >= 10 { a.beta.unwrap_or(0.0) } else { beta };
    let mut values: Vec<(f64, f64)> = Vec::new();
    match a.id.as_str() {
        "W" | "w" => {
            let c = case()?;
            let g = a.gamma1.map(Ok).unwrap_or_else(|| default_gamma1(c))?;
            let law = LimitLaw::new(c, flat_beta(c), g, a.c)?;
            for &t in &a.t {
                values.push((t, law.w(t)?));
            }
        }
        "H" | "h" => {
            let c = case()?;
            let h = match hurst(c, flat_beta(c))? {
                Hurst::Exponent(h) => h,
                Hurst::Piecewise => f64::NAN,
            };
            values.push((f64::NAN, h));
        }
        id => {
            let id: u8 = id
                .parse()
                .map_err(|_| CliError::Validation(format!("--id must be 1..=23, W or H, got \"{id}\"")))?;
            for &t in &a.t {
                values.push((t, limit_constant(id, t, beta, a.c)?));
            }
        }
    }
    let opt = |x: f64| if x.is_nan() { String::new() } else { fmt_f64(x) };
    match a.format {
        None => {
            for (_, v) in &values {
                println!("{}", opt(*v));
            }
        }
        Some(Format::Csv) => {
            let rows = values
                .iter()
                .map(|(t, v)| {
                    vec![
                        a.id.clone(),
                        opt(*t),
                        a.beta.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(a.c),
                        opt(*v),
                    ]
                })
                .collect();
            emit(None, &table_csv(&["id", "t", "beta", "c", "value"], rows)?)?;
        }
        Some(Format::Json) => {
            let items: Vec<Value> = values
                .iter()
                .map(|(t, v)| {
                    json!({"id": a.id, "t": t.is_finite().then_some(*t), "beta": a.beta, "c": a.c,
                           "value": v.is_finite().then_some(*v)})
                })
                .collect();
            emit(None, &json_bytes(&items)?)?;
        }
    }
    Ok(())
}

fn exact_var(a: &TableArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    let table = convergence_table(&cfg)?;
    for r in table.rows.iter().filter(|r| r.non_monotone) {
        eprintln!("warning: |ratio - 1| grew at n={} t={}", r.n, r.t);
    }
    for r in table.rows.iter().filter(|r| r.empty) {
        eprintln!("warning: empty window at n={} t={}", r.n, r.t);
    }
    let bytes = match a.format {
        Format::Csv => results_csv(&convergence_rows(cfg.case.j(), &table, Some(cfg.seed)))?,
        Format::Json => json_bytes(&table)?,
    };
    emit(a.out.as_deref(), &bytes)
}

fn lyapunov(a: &TableArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    let series = suites::lyapunov_series(&cfg)?;
    let bytes = match a.format {
        Format::Csv => results_csv(
            &series
                .iter()
                .map(|&(n, l)| ResultRow {
                    case: cfg.case.j(),
                    n: Some(n),
                    t: Some(1.0),
                    lyapunov: Some(l),
                    seed: Some(cfg.seed),
                    ..ResultRow::default()
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_bytes(
            &series
                .iter()
                .map(|&(n, l)| json!({"n": n, "lyapunov": l}))
                .collect::<Vec<_>>(),
        )?,
    };
    emit(a.out.as_deref(), &bytes)
}

fn limit_sim(a: &LimitSimArgs) -> Result<(), CliError> {
    let proc = match (a.case, a.fbm) {
        (Some(j), _) => {
            let case = CaseId::new(j)?;
            let g = a.gamma1.map(Ok).unwrap_or_else(|| default_gamma1(case))?;
            let law = LimitLaw::new(case, a.beta, g, a.c)?;
            // validate every cell before handing the kernel over
            for &s in &a.grid {
                for &t in &a.grid {
                    law.covariance(s, t)?;
                }
            }
            GaussianGridProcess::new(&a.grid, |s, t| law.covariance(s, t).unwrap_or(f64::NAN))?
        }
        (None, Some(h)) => GaussianGridProcess::new(&a.grid, fbm_covariance(h)?)?,
        (None, None) => return Err(CliError::Validation("one of --case or --fbm is required".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::with_capacity(a.paths * a.grid.len());
    for p in 0..a.paths {
        let x = proc.sample(&mut rng);
        for (t, v) in a.grid.iter().zip(x) {
            rows.push(vec![p.to_string(), fmt_f64(*t), fmt_f64(v)]);
        }
    }
    emit(a.out.as_deref(), &table_csv(&["path", "t", "value"], rows)?)
}

fn verify(a: &VerifyArgs, argv: &[String]) -> Result<(), CliError> {
    let started = now();
    let mut check_rows = Vec::new();
    let mut rows = Vec::new();
    let mut failed = 0;
    for id in a.suite.criteria() {
        let outcome = suites::run_criterion(id, a.seed);
        println!("{}", outcome.summary_line());
        for c in outcome.failures() {
            println!("    failed: {}: {}", c.name, c.detail);
        }
        failed += outcome.checks.iter().filter(|c| !c.passed).count();
        for c in &outcome.checks {
            check_rows.push(vec![
                id.to_string(),
                c.name.clone(),
                c.passed.to_string(),
                c.detail.clone(),
            ]);
        }
        rows.extend(outcome.rows);
    }
    if let Some(out) = &a.out {
        let mut dir = RunDir::create(out)?;
        dir.write(
            "checks.csv",
            &table_csv(&["criterion", "check", "passed", "detail"], check_rows)?,
        )?;
        dir.write("results.csv", &results_csv(&rows)?)?;
        let config = json!({"suite": a.suite.name(), "seed": a.seed});
        dir.finish(manifest(argv, config, Some(a.seed), started))?;
    }
    if failed > 0 {
        Err(CliError::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

fn report(a: &ReportArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", a.input.display())))?;
    let report: ExperimentReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{} is not a report: {e}", a.input.display())))?;
    match a.format {
        Format::Csv => emit(None, &results_csv(&report_rows(&report))?),
        Format::Json => emit(None, &json_bytes(&report)?),
    }
}
