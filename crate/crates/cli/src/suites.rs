//! Verification suites. Each suite checks one family of claims against an
//! oracle that does not share code with the implementation under test:
//! brute-force expansions, closed forms, or Monte Carlo with 4-SE bands.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taperflow_core::coefficients::{
    d_coefficients, delta_for_case, exact_variance, lyapunov_fraction, profile_for, window_len,
};
use taperflow_core::gaussian_limits::{
    fbm_covariance, tfbm2_variance, tfbm_variance, GaussianGridProcess, Tfbm2Prefactor,
};
use taperflow_core::limit_theory::{
    c11, c13, c14, c15, c15_quadrature, c16, c20, c4_limit_check, c4_tail_bound, c6_quadrature, c7, i_quadrature,
    i_series, scaling_probe,
};
use taperflow_core::montecarlo::{convergence_table, run_experiment, ExperimentConfig, ExperimentReport};
use taperflow_core::path_engine::{naive_convolution, EngineOptions, PathConfig, PathGenerator};
use taperflow_core::stats::{covariance_with_se, variance, variance_se};
use taperflow_core::{CaseId, Filter, InnovationModel, LimitLaw};

use crate::output::{convergence_rows, fmt_f64, report_rows, results_csv, ResultRow};

/// `(j, β, γ₁, c)` for the nine non-flat cases.
pub const FILTER_CASES: [(u8, f64, f64, f64); 9] = [
    (1, 0.75, 0.5, 1.0),
    (2, 2.0, 0.5, 1.0),
    (3, 1.25, 0.5, 1.0),
    (4, 0.75, 1.5, 1.0),
    (5, 2.0, 1.5, 1.0),
    (6, 1.25, 1.5, 1.0),
    (7, 0.75, 1.0, 1.0),
    (8, 2.0, 1.0, 1.0),
    (9, 1.25, 1.0, 1.0),
];

/// Hard-tapering configurations `(j, β, γ₁, c, α, γ)`.
pub const TAPERED_CASES: [(u8, f64, f64, f64, f64, f64); 2] =
    [(2, 2.0, 0.5, 1.0, 1.5, 0.4), (8, 2.0, 1.0, 1.0, 1.2, 0.5)];

pub const SKEW_MAX: f64 = 0.2;
pub const EXKURT_MAX: f64 = 0.4;
pub const KS_MAX: f64 = 0.03;
pub const SE_BAND: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Deterministic given the seed; no timings.
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn failed(name: impl Into<String>, err: impl fmt::Display) -> Check {
    check(name, false, format!("error: {err}"))
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub rows: Vec<ResultRow>,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `PASS [3] flat-filter variance ratios (12/12 checks, 0.4 s)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "{} [{}] {} ({}/{} checks, {:.1} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            ok,
            self.checks.len(),
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed<F: FnOnce(&mut Vec<Check>, &mut Vec<ResultRow>)>(id: u8, title: &'static str, f: F) -> CriterionOutcome {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    f(&mut checks, &mut rows);
    CriterionOutcome {
        id,
        title,
        checks,
        rows,
        elapsed: start.elapsed(),
    }
}

fn budget(checks: &mut Vec<Check>, start: Instant, limit: Duration) {
    let e = start.elapsed();
    checks.push(check(
        format!("runtime below {} s", limit.as_secs()),
        e < limit,
        // coarse, so the detail stays reproducible
        if e < limit {
            "within budget".into()
        } else {
            format!("over budget by {:.0} s", (e - limit).as_secs_f64())
        },
    ));
}

fn case(j: u8) -> CaseId {
    CaseId::new(j).expect("case table holds valid ids")
}

/// `Var Σ_{k=1}^{m} X_k` by double summation of the autocovariance.
pub fn brute_force_variance(f: &[f64], m: usize) -> f64 {
    let gamma = |h: usize| -> f64 {
        if h >= f.len() {
            0.0
        } else {
            f.iter().zip(&f[h..]).map(|(a, b)| a * b).sum()
        }
    };
    let mut v = 0.0;
    for k in 0..m {
        for l in 0..m {
            v += gamma(k.abs_diff(l));
        }
    }
    v
}

/// Exact variances against a brute-force expansion on random small filters.
pub fn coefficient_oracle(seed: u64) -> CriterionOutcome {
    timed(1, "coefficient oracle equivalence", |checks, _| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let (mut worst, mut tested, mut bad) = (0.0f64, 0, 0);
        while tested < 500 {
            let n: u64 = rng.gen_range(1..=64);
            let lambda: usize = rng.gen_range(0..=16);
            let f: Vec<f64> = (0..=lambda).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t: f64 = rng.gen_range(0.05..2.0);
            let m = window_len(n, t).expect("valid n, t") as usize;
            if m == 0 {
                continue;
            }
            tested += 1;
            let want = brute_force_variance(&f, m);
            match d_coefficients(&f, n, t) {
                Ok(p) => {
                    let rel = (exact_variance(&p, 1.0) - want).abs() / want.abs().max(f64::MIN_POSITIVE);
                    worst = worst.max(rel);
                    if rel > 1e-12 {
                        bad += 1;
                    }
                }
                Err(_) => bad += 1,
            }
        }
        checks.push(check(
            "500 random configurations within 1e-12 relative",
            bad == 0,
            format!("{bad} mismatches, worst relative error {worst:.3e}"),
        ));
        budget(checks, start, Duration::from_secs(2));
    })
}

/// `|Var Z_n(t)/W(t) - 1|` nonincreasing from `n = 10⁵` to `10⁶` and at
/// most 0.1 at `10⁶`.
pub fn deterministic_convergence() -> CriterionOutcome {
    timed(2, "deterministic variance convergence", |checks, rows| {
        let start = Instant::now();
        for (j, beta, g, c) in FILTER_CASES {
            let cfg = ExperimentConfig::new(case(j), beta, g, c, vec![100_000, 1_000_000], vec![0.5, 1.0, 2.0]);
            let table = match convergence_table(&cfg) {
                Ok(t) => t,
                Err(e) => {
                    checks.push(failed(format!("case {j}"), e));
                    continue;
                }
            };
            rows.extend(convergence_rows(j, &table, None));
            for t in [0.5, 1.0, 2.0] {
                let e: Vec<f64> = table.at(t).map(|r| r.error.unwrap_or(f64::NAN)).collect();
                checks.push(check(
                    format!("case {j} t={t}: nonincreasing"),
                    e[1] <= e[0],
                    format!("{:.3e} -> {:.3e}", e[0], e[1]),
                ));
                checks.push(check(
                    format!("case {j} t={t}: <= 0.1 at n=1e6"),
                    e[1] <= 0.1,
                    format!("{:.3e}", e[1]),
                ));
            }
        }
        budget(checks, start, Duration::from_secs(60));
    })
}

/// Flat filters: ratio within 0.02 of the limit at `n = 10⁵`.
pub fn flat_filters() -> CriterionOutcome {
    timed(3, "flat-filter variance ratios", |checks, rows| {
        for (j, g, c) in [(10u8, 0.5, 1.0), (11, 1.5, 1.0), (12, 1.0, 0.5), (12, 1.0, 2.0)] {
            let cfg = ExperimentConfig::new(case(j), 0.0, g, c, vec![100_000], vec![0.5, 1.0, 2.0]);
            match convergence_table(&cfg) {
                Ok(table) => {
                    rows.extend(convergence_rows(j, &table, None));
                    for r in &table.rows {
                        let e = r.error.unwrap_or(f64::NAN);
                        checks.push(check(
                            format!("case {j} c={c} t={}", r.t),
                            e <= 0.02,
                            format!("{e:.3e}"),
                        ));
                    }
                }
                Err(e) => checks.push(failed(format!("case {j} c={c}"), e)),
            }
        }
    })
}

pub fn constants() -> CriterionOutcome {
    timed(4, "limit constants", |checks, _| {
        let mut close = |name: String, got: Result<f64, taperflow_core::Error>, want: f64, tol: f64| match got {
            Ok(v) => checks.push(check(name, (v - want).abs() <= tol, format!("{v:.15e} vs {want:.15e}"))),
            Err(e) => checks.push(failed(name, e)),
        };
        for beta in [0.6, 0.75, 0.9] {
            let closed = 1.0 / ((1.0 - beta) * (1.0 - beta) * (3.0 - 2.0 * beta));
            close(format!("C6 quadrature, beta={beta}"), c6_quadrature(beta), closed, 1e-8);
        }
        for beta in [1.2, 1.25, 1.4] {
            let closed = 1.0 / ((beta - 1.0) * (beta - 1.0) * (3.0 - 2.0 * beta));
            close(
                format!("C15 quadrature, beta={beta}"),
                c15_quadrature(beta),
                closed,
                1e-8,
            );
            close(
                format!("C15 closed form, beta={beta}"),
                c15(beta),
                closed,
                1e-12 * closed,
            );
        }
        for (beta, c) in [(0.75, 1.0), (0.6, 0.4), (0.9, 2.5)] {
            let v = c13(1.0, beta, c);
            checks.push(check(
                format!("C13(1), beta={beta} c={c}"),
                v == Ok(1.0),
                format!("{v:?}"),
            ));
        }
        for (beta, c) in [(1.25, 1.0), (1.1, 0.4), (1.4, 2.5)] {
            let v = c20(1.0, beta, c);
            checks.push(check(
                format!("C20(1), beta={beta} c={c}"),
                v == Ok(1.0),
                format!("{v:?}"),
            ));
        }
        for beta in [0.6, 0.75, 0.9] {
            match (c7(1.0, beta), c11(1.0, beta)) {
                (Ok(a), Ok(b)) => checks.push(check(
                    format!("|C7 - C11| at z=1, beta={beta}"),
                    (a - b).abs() <= 1e-6,
                    format!("{:.3e}", (a - b).abs()),
                )),
                (a, b) => checks.push(failed(format!("C7/C11, beta={beta}"), format!("{a:?} {b:?}"))),
            }
        }
        for beta in [1.1, 1.25, 1.4] {
            match (c14(1.0, beta), c16(1.0, beta)) {
                (Ok(a), Ok(b)) => checks.push(check(
                    format!("|C14 - C16| at z=1, beta={beta}"),
                    (a - b).abs() <= 1e-6,
                    format!("{:.3e}", (a - b).abs()),
                )),
                (a, b) => checks.push(failed(format!("C14/C16, beta={beta}"), format!("{a:?} {b:?}"))),
            }
        }
        for beta in [0.6, 0.75, 1.25, 1.4] {
            let mut worst = 0.0f64;
            let mut err = None;
            for k in 1..20 {
                let z = 1.0 + k as f64 / 20.0;
                match (i_series(z, beta), i_quadrature(z, beta)) {
                    (Ok(s), Ok(q)) => worst = worst.max((s - q).abs() / q.abs().max(1.0)),
                    (a, b) => err = Some(format!("{a:?} {b:?}")),
                }
            }
            match err {
                Some(e) => checks.push(failed(format!("I(z) series, beta={beta}"), e)),
                None => checks.push(check(
                    format!("I(z) series vs quadrature on (1,2), beta={beta}"),
                    worst <= 1e-9,
                    format!("{worst:.3e}"),
                )),
            }
        }
        let zs = [1e2, 1e3, 1e4];
        for beta in [0.75, 1.25] {
            match c4_limit_check(beta, &zs) {
                Ok(res) => {
                    for (r, z) in res.iter().zip(zs) {
                        let bound = c4_tail_bound(z, beta);
                        checks.push(check(
                            format!("C4 -> C1 residual, beta={beta} z={z:e}"),
                            *r <= bound,
                            format!("{r:.3e} <= {bound:.3e}"),
                        ));
                    }
                }
                Err(e) => checks.push(failed(format!("C4 -> C1, beta={beta}"), e)),
            }
        }
    })
}

fn mc_config(j: u8, beta: f64, g: f64, c: f64, innovation: InnovationModel, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(case(j), beta, g, c, vec![100_000], vec![0.5, 1.0]);
    cfg.innovation = innovation;
    cfg.reps = 4000;
    cfg.seed = seed;
    cfg
}

fn normality_checks(checks: &mut Vec<Check>, label: &str, report: &ExperimentReport) {
    let size = &report.sizes[0];
    match size.normality {
        Some(nm) => {
            checks.push(check(
                format!("{label}: |skew| <= {SKEW_MAX}"),
                nm.skew.abs() <= SKEW_MAX,
                format!("{:.4}", nm.skew),
            ));
            checks.push(check(
                format!("{label}: |exkurt| <= {EXKURT_MAX}"),
                nm.exkurt.abs() <= EXKURT_MAX,
                format!("{:.4}", nm.exkurt),
            ));
            checks.push(check(
                format!("{label}: KS <= {KS_MAX}"),
                nm.ks <= KS_MAX,
                format!("{:.4}", nm.ks),
            ));
        }
        None => checks.push(check(format!("{label}: normality"), false, "too few replications")),
    }
}

/// Gaussian f.d.d. for cases 1, 4, 7 with Gaussian innovations.
pub fn gaussianity(seed: u64) -> CriterionOutcome {
    timed(5, "Gaussian finite-dimensional distributions", |checks, rows| {
        for (j, beta, g, c) in [FILTER_CASES[0], FILTER_CASES[3], FILTER_CASES[6]] {
            let start = Instant::now();
            let cfg = mc_config(j, beta, g, c, InnovationModel::Gaussian, seed);
            let report = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    checks.push(failed(format!("case {j}"), e));
                    continue;
                }
            };
            rows.extend(report_rows(&report));
            normality_checks(checks, &format!("case {j}"), &report);
            let cv = &report.sizes[0].covariances[0];
            let gap = (cv.cov_z - cv.kernel).abs();
            checks.push(check(
                format!("case {j}: Cov(Z(0.5), Z(1)) within 4 SE of the kernel"),
                gap <= SE_BAND * cv.cov_z_se,
                format!("{:.4} vs {:.4} (se {:.4})", cv.cov_z, cv.kernel, cv.cov_z_se),
            ));
            budget(checks, start, Duration::from_secs(300));
        }
    })
}

/// Hard-tapered Pareto innovations.
pub fn hard_tapering(seed: u64) -> CriterionOutcome {
    timed(6, "hard tapering", |checks, rows| {
        for (j, beta, g, c, alpha, gamma) in TAPERED_CASES {
            let cfg = mc_config(j, beta, g, c, InnovationModel::TaperedPareto { alpha, gamma }, seed);
            let report = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    checks.push(failed(format!("case {j}"), e));
                    continue;
                }
            };
            rows.extend(report_rows(&report));
            let label = format!("case {j} alpha={alpha} gamma={gamma}");
            let p = &report.sizes[0].points[1];
            checks.push(check(
                format!("{label}: Var Z(1) within 4 SE of the exact value"),
                (p.var_z - p.var_exact_z).abs() <= SE_BAND * p.var_z_se,
                format!("{:.4} vs {:.4} (se {:.4})", p.var_z, p.var_exact_z, p.var_z_se),
            ));
            normality_checks(checks, &label, &report);
        }
    })
}

/// `L(2+δ, n, 1)` nonincreasing over `n ∈ {10³, 10⁴, 10⁵}` and below 0.05.
pub fn lyapunov_decay() -> CriterionOutcome {
    timed(7, "Lyapunov decay", |checks, rows| {
        let mut configs: Vec<(u8, f64, f64, f64, InnovationModel)> = FILTER_CASES
            .iter()
            .map(|&(j, b, g, c)| (j, b, g, c, InnovationModel::Gaussian))
            .collect();
        for (j, b, g, c, alpha, gamma) in TAPERED_CASES {
            configs.push((j, b, g, c, InnovationModel::TaperedPareto { alpha, gamma }));
        }
        for (j, beta, g, c, inn) in configs {
            let label = match inn {
                InnovationModel::TaperedPareto { alpha, gamma } => format!("case {j} alpha={alpha} gamma={gamma}"),
                _ => format!("case {j}"),
            };
            let mut cfg = ExperimentConfig::new(case(j), beta, g, c, vec![1_000, 10_000, 100_000], vec![1.0]);
            cfg.innovation = inn;
            match lyapunov_series(&cfg) {
                Ok(series) => {
                    rows.extend(series.iter().map(|&(n, l)| ResultRow {
                        case: j,
                        n: Some(n),
                        t: Some(1.0),
                        lyapunov: Some(l),
                        ..ResultRow::default()
                    }));
                    let ls: Vec<f64> = series.iter().map(|x| x.1).collect();
                    checks.push(check(
                        format!("{label}: nonincreasing"),
                        ls.windows(2).all(|w| w[1] <= w[0]),
                        format!("{:.3e}, {:.3e}, {:.3e}", ls[0], ls[1], ls[2]),
                    ));
                    checks.push(check(
                        format!("{label}: < 0.05 at n=1e5"),
                        ls[2] < 0.05,
                        format!("{:.3e}", ls[2]),
                    ));
                }
                Err(e) => checks.push(failed(label, e)),
            }
        }
    })
}

/// `(n, L(2+δ, n, 1))` for each size in `cfg.n_list`.
pub fn lyapunov_series(cfg: &ExperimentConfig) -> Result<Vec<(u64, f64)>, taperflow_core::Error> {
    let spec = cfg.filter_spec()?;
    let delta = delta_for_case(spec.case_id(), cfg.beta)?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let filter = Filter::new(&spec, n)?;
            let p = profile_for(&filter, 1.0)?;
            let ratio = cfg.innovation.resolve(n)?.moment_ratio(delta)?;
            Ok((n, lyapunov_fraction(&p, &p, delta, ratio)?))
        })
        .collect()
}

pub const SAMPLER_GRID: [f64; 8] = [0.125, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];

fn sampler_moments<K: Fn(f64, f64) -> f64>(checks: &mut Vec<Check>, label: &str, kernel: K, rng: &mut ChaCha8Rng) {
    let proc = match GaussianGridProcess::new(&SAMPLER_GRID, &kernel) {
        Ok(p) => p,
        Err(e) => {
            checks.push(failed(label, e));
            return;
        }
    };
    let paths: Vec<Vec<f64>> = (0..20_000).map(|_| proc.sample(rng)).collect();
    let col = |i: usize| paths.iter().map(|p| p[i]).collect::<Vec<f64>>();
    let (mut worst, mut bad, mut total) = (0.0f64, 0, 0);
    for i in 0..SAMPLER_GRID.len() {
        let xi = col(i);
        for l in i..SAMPLER_GRID.len() {
            let (est, se) = if l == i {
                (variance(&xi), variance_se(&xi))
            } else {
                covariance_with_se(&xi, &col(l))
            };
            let z = (est - kernel(SAMPLER_GRID[i], SAMPLER_GRID[l])).abs() / se;
            worst = worst.max(z);
            total += 1;
            if z > SE_BAND {
                bad += 1;
            }
        }
    }
    checks.push(check(
        format!("{label}: {total} variances and covariances within 4 SE"),
        bad == 0,
        format!("{bad} outside, largest deviation {worst:.2} SE"),
    ));
}

pub fn limit_samplers(seed: u64) -> CriterionOutcome {
    timed(8, "limit-process samplers", |checks, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(8);
        for h in [0.25, 0.5, 0.75] {
            match fbm_covariance(h) {
                Ok(k) => sampler_moments(checks, &format!("FBM H={h}"), k, &mut rng),
                Err(e) => checks.push(failed(format!("FBM H={h}"), e)),
            }
        }
        match LimitLaw::new(case(7), 0.75, 1.0, 1.0) {
            Ok(law) => sampler_moments(
                checks,
                "case 7 limit",
                |s, t| law.covariance(s, t).unwrap_or(f64::NAN),
                &mut rng,
            ),
            Err(e) => checks.push(failed("case 7 limit", e)),
        }
        let linear = LimitLaw::new(case(11), 0.0, 1.5, 1.0)
            .and_then(|law| GaussianGridProcess::new(&SAMPLER_GRID, |s, t| law.covariance(s, t).unwrap_or(f64::NAN)));
        match linear {
            Ok(proc) => {
                let mut worst = 0.0f64;
                for _ in 0..1000 {
                    let p = proc.sample(&mut rng);
                    let slope = p[0] / SAMPLER_GRID[0];
                    for (x, t) in p.iter().zip(SAMPLER_GRID) {
                        worst = worst.max((x / t - slope).abs() / slope.abs().max(f64::MIN_POSITIVE));
                    }
                }
                checks.push(check(
                    "case 11 paths: path(t)/t constant",
                    worst <= 1e-10,
                    format!("{worst:.3e}"),
                ));
            }
            Err(e) => checks.push(failed("case 11 limit", e)),
        }
    })
}

pub fn kernel_reductions() -> CriterionOutcome {
    timed(9, "kernel reductions at zero tempering", |checks, _| {
        for h in [0.25, 0.5, 0.75] {
            let g = scaling_probe(|t| tfbm_variance(0.5 - h, 0.0, t), 1.0, 2.0);
            let g2 = scaling_probe(|t| tfbm2_variance(h, 0.0, t, Tfbm2Prefactor::Lambda), 1.0, 2.0);
            for (name, v) in [("TFBM", g), ("TFBMII", g2)] {
                match v {
                    Ok(x) => checks.push(check(
                        format!("{name} H={h}: exponent 2H"),
                        (x - 2.0 * h).abs() <= 1e-3,
                        format!("{x:.6}"),
                    )),
                    Err(e) => checks.push(failed(format!("{name} H={h}"), e)),
                }
            }
        }
    })
}

/// A small seeded experiment whose CSV rows exercise every random stage.
pub fn engine_experiment(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(case(1), 0.75, 0.5, 1.0, vec![2000], vec![0.5, 1.0]);
    cfg.reps = 500;
    cfg.seed = seed;
    cfg
}

/// FFT against direct convolution, and reproducibility of a seeded run
/// across thread counts.
pub fn engine(seed: u64) -> CriterionOutcome {
    timed(10, "engine consistency", |checks, rows| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(10);
        let opts = EngineOptions {
            fft_threshold: 0,
            ..EngineOptions::default()
        };
        let (mut worst, mut bad) = (0.0f64, 0);
        for _ in 0..200 {
            let m: usize = rng.gen_range(1..=2048);
            let lambda: usize = rng.gen_range(0..=2048);
            let filter: Vec<f64> = (0..=lambda).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xi: Vec<f64> = (0..lambda + m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let cfg = PathConfig {
                filter: filter.clone(),
                innovation: InnovationModel::Gaussian,
                n: m as u64,
                t_grid: vec![1.0],
                seed: 0,
            };
            let fast = PathGenerator::new(&cfg, &opts).and_then(|g| g.convolve(&xi));
            let Ok(fast) = fast else {
                bad += 1;
                continue;
            };
            let slow = naive_convolution(&filter, &xi);
            let scale = slow.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let err = fast.iter().zip(&slow).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale;
            worst = worst.max(err);
            if err > 1e-9 {
                bad += 1;
            }
        }
        checks.push(check(
            "FFT vs direct convolution on 200 random configurations",
            bad == 0,
            format!("{bad} mismatches, worst relative error {worst:.3e}"),
        ));

        let cfg = engine_experiment(seed);
        let run = |threads: usize| -> Result<Vec<u8>, String> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| e.to_string())?;
            let report = pool.install(|| run_experiment(&cfg)).map_err(|e| e.to_string())?;
            results_csv(&report_rows(&report)).map_err(|e| e.to_string())
        };
        match (run(1), run(4), run(4)) {
            (Ok(a), Ok(b), Ok(c)) => {
                checks.push(check("seeded experiment is byte-identical across runs", b == c, ""));
                checks.push(check(
                    "seeded experiment is byte-identical for 1 and 4 threads",
                    a == b,
                    "",
                ));
            }
            (a, b, c) => checks.push(failed(
                "seeded experiment",
                format!("{:?}", [a.err(), b.err(), c.err()]),
            )),
        }
        match run_experiment(&cfg) {
            Ok(report) => {
                rows.extend(report_rows(&report));
                for p in &report.sizes[0].points {
                    checks.push(check(
                        format!("empirical Var Z({}) within 4 SE of the exact value", p.t),
                        (p.var_z - p.var_exact_z).abs() <= SE_BAND * p.var_z_se,
                        format!(
                            "{} vs {} (se {})",
                            fmt_f64(p.var_z),
                            fmt_f64(p.var_exact_z),
                            fmt_f64(p.var_z_se)
                        ),
                    ));
                }
            }
            Err(e) => checks.push(failed("seeded experiment", e)),
        }
    })
}

/// Named groups of checks for `verify --suite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Coefficients,
    Convergence,
    Flat,
    Constants,
    Gaussianity,
    Tapering,
    Lyapunov,
    Samplers,
    Kernels,
    Engine,
}

impl Suite {
    pub const NAMES: [&'static str; 11] = [
        "all",
        "coefficients",
        "convergence",
        "flat",
        "constants",
        "gaussianity",
        "tapering",
        "lyapunov",
        "samplers",
        "kernels",
        "engine",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Coefficients => "coefficients",
            Suite::Convergence => "convergence",
            Suite::Flat => "flat",
            Suite::Constants => "constants",
            Suite::Gaussianity => "gaussianity",
            Suite::Tapering => "tapering",
            Suite::Lyapunov => "lyapunov",
            Suite::Samplers => "samplers",
            Suite::Kernels => "kernels",
            Suite::Engine => "engine",
        }
    }

    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::All => (1..=10).collect(),
            Suite::Coefficients => vec![1],
            Suite::Convergence => vec![2],
            Suite::Flat => vec![3],
            Suite::Constants => vec![4],
            Suite::Gaussianity => vec![5],
            Suite::Tapering => vec![6],
            Suite::Lyapunov => vec![7],
            Suite::Samplers => vec![8],
            Suite::Kernels => vec![9],
            Suite::Engine => vec![10],
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let all = [
            Suite::All,
            Suite::Coefficients,
            Suite::Convergence,
            Suite::Flat,
            Suite::Constants,
            Suite::Gaussianity,
            Suite::Tapering,
            Suite::Lyapunov,
            Suite::Samplers,
            Suite::Kernels,
            Suite::Engine,
        ];
        Suite::NAMES
            .iter()
            .position(|&n| n == s)
            .map(|i| all[i])
            .ok_or_else(|| format!("unknown suite \"{s}\"; expected one of {}", Suite::NAMES.join(", ")))
    }
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionOutcome {
    match id {
        1 => coefficient_oracle(seed),
        2 => deterministic_convergence(),
        3 => flat_filters(),
        4 => constants(),
        5 => gaussianity(seed),
        6 => hard_tapering(seed),
        7 => lyapunov_decay(),
        8 => limit_samplers(seed),
        9 => kernel_reductions(),
        10 => engine(seed),
        _ => panic!("no criterion {id}"),
    }
}
