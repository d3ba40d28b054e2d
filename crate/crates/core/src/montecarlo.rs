//! Seeded replication experiments: empirical variances and covariances of
//! the normalized partial sums, normality of `S_n(1)`, and the deterministic
//! convergence table built from exact coefficients.
//!
//! Replication `r` at the `i`-th sample size draws from the ChaCha8 stream
//! `(i << 32) | r` of the master seed, so reports do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    delta_for_case, exact_variance, lyapunov_fraction, presample_gram, profile_for, profile_for_window, window_len,
};
use crate::error::{config, domain, Error, Result};
use crate::filters::{filter_sum, A0Mode, CaseId, Filter, FilterSpec, InnovationTaper};
use crate::gaussian_limits::factorize_psd;
use crate::innovations::{Innovation, InnovationModel};
use crate::limit_theory::LimitLaw;
use crate::path_engine::{check_grid, partial_sums, EngineOptions, PathConfig, PathGenerator};
use crate::stats::{covariance_with_se, normality_with_scale, variance, variance_se, Normality, MIN_NORMALITY_SAMPLES};

pub use crate::stats::normality_diagnostics;

/// How the innovations with index `≤ 0` enter a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresampleMode {
    /// `Aggregated` for Gaussian innovations with `λ > 4M` and
    /// `λ + M > 2^20`, `Exact` otherwise.
    #[default]
    Auto,
    /// Every innovation `ξ_{1-λ}..ξ_M` is drawn and convolved.
    Exact,
    /// Only `ξ_1..ξ_M` are drawn; the pre-sample part of the partial sums
    /// is drawn jointly from its exact Gaussian law `N(0, σ² G)`.
    Aggregated,
}

fn default_reps() -> usize {
    4000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: CaseId,
    pub beta: f64,
    pub gamma1: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0_mode: Option<A0Mode>,
    pub innovation: InnovationModel,
    pub n_list: Vec<u64>,
    pub t_grid: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub seed: u64,
    /// Pairs `(s, t)` of grid points; empty means every pair `s < t`.
    #[serde(default)]
    pub cov_pairs: Vec<(f64, f64)>,
    #[serde(default)]
    pub presample: PresampleMode,
    #[serde(default)]
    pub engine: EngineOptions,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    /// Gaussian innovations, default engine, all covariance pairs.
    pub fn new(case: CaseId, beta: f64, gamma1: f64, c: f64, n_list: Vec<u64>, t_grid: Vec<f64>) -> Self {
        ExperimentConfig {
            case,
            beta,
            gamma1,
            c,
            a0_mode: None,
            innovation: InnovationModel::Gaussian,
            n_list,
            t_grid,
            reps: default_reps(),
            seed: 0,
            cov_pairs: Vec::new(),
            presample: PresampleMode::Auto,
            engine: EngineOptions::default(),
        }
    }

    pub fn filter_spec(&self) -> Result<FilterSpec> {
        let spec = FilterSpec::for_case(self.case, self.beta, self.gamma1, self.c)?;
        match self.a0_mode {
            Some(mode) => spec.with_a0_mode(mode),
            None => Ok(spec),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter_spec()?;
        self.innovation.validate()?;
        if let Some(class) = self.innovation.taper_class() {
            let class = class?;
            if class != InnovationTaper::Hard {
                return config(format!(
                    "{class:?} tapering is out of scope: only hard tapering (gamma < 1/alpha) has a Gaussian limit"
                ));
            }
        }
        if self.reps == 0 {
            return config("reps must be at least 1");
        }
        if self.n_list.is_empty() {
            return config("n list is empty");
        }
        if self.n_list.contains(&0) {
            return domain("sample sizes must be positive");
        }
        check_grid(&self.t_grid)?;
        for &(s, t) in &self.cov_pairs {
            if !self.t_grid.contains(&s) || !self.t_grid.contains(&t) {
                return config(format!("covariance pair ({s}, {t}) is not on the t grid"));
            }
            if s == t {
                return config(format!("covariance pair ({s}, {t}) repeats a point"));
            }
        }
        if self.presample == PresampleMode::Aggregated && !self.innovation.is_gaussian() {
            return config("aggregated pre-sample draws need Gaussian innovations");
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let idx = |v: f64| self.t_grid.iter().position(|&t| t == v).expect("validated");
        if self.cov_pairs.is_empty() {
            let k = self.t_grid.len();
            (0..k).flat_map(|i| (i + 1..k).map(move |l| (i, l))).collect()
        } else {
            self.cov_pairs.iter().map(|&(s, t)| (idx(s), idx(t))).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub t: f64,
    pub m: u64,
    /// Empirical `Var Z_n(t)` and its standard error.
    pub var_z: f64,
    pub var_z_se: f64,
    /// `σ² Σ_j d_j²`.
    pub var_exact: f64,
    /// `var_exact / Ā_n²`.
    pub var_exact_z: f64,
    pub w: f64,
    /// `var_exact_z / W(t)`.
    pub var_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceStats {
    pub s: f64,
    pub t: f64,
    pub cov_z: f64,
    pub cov_z_se: f64,
    /// `Cov(Z_n(s), Z_n(t))` from exact coefficients, using stationarity:
    /// `S_t - S_s` has the law of `S_{m_t - m_s}`.
    pub cov_exact_z: f64,
    /// Limit covariance `½ (W(s) + W(t) - W(t - s))`.
    pub kernel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: u64,
    pub lambda: u64,
    /// `Eξ²` at this `n`.
    pub sigma2: f64,
    /// `Ā_n² = A_n² σ²`.
    pub a_n_sq: f64,
    /// `Exact` or `Aggregated`, as actually used.
    pub presample: PresampleMode,
    pub points: Vec<PointStats>,
    pub covariances: Vec<CovarianceStats>,
    /// Grid point whose partial sums are tested for normality: `1` when on
    /// the grid, else the largest point.
    pub normality_t: f64,
    /// `None` with fewer than 100 replications.
    pub normality: Option<Normality>,
    pub delta: f64,
    /// `L(2+δ, n, 1)`.
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeReport>,
}

/// Everything about one sample size that does not involve sampling.
struct Exact {
    filter: Filter,
    innovation: Innovation,
    sigma2: f64,
    a_n_sq: f64,
    ms: Vec<u64>,
    var_exact: Vec<f64>,
    w: Vec<f64>,
}

fn exact_part(cfg: &ExperimentConfig, spec: &FilterSpec, law: &LimitLaw, n: u64) -> Result<Exact> {
    let filter = Filter::new(spec, n)?;
    let innovation = cfg.innovation.resolve(n)?;
    let sigma2 = innovation.variance();
    let a_n_sq = law.normalizer_sq(n, filter_sum(spec).ok())? * sigma2;
    let mut ms = Vec::new();
    let mut var_exact = Vec::new();
    let mut w = Vec::new();
    for &t in &cfg.t_grid {
        let profile = profile_for(&filter, t)?;
        ms.push(profile.m());
        var_exact.push(exact_variance(&profile, sigma2));
        w.push(law.w(t)?);
    }
    Ok(Exact {
        filter,
        innovation,
        sigma2,
        a_n_sq,
        ms,
        var_exact,
        w,
    })
}

fn resolve_mode(cfg: &ExperimentConfig, lambda: u64, m: u64) -> PresampleMode {
    match cfg.presample {
        PresampleMode::Auto => {
            if cfg.innovation.is_gaussian() && lambda > 4 * m && m + lambda > 1 << 20 {
                PresampleMode::Aggregated
            } else {
                PresampleMode::Exact
            }
        }
        mode => mode,
    }
}

/// Partial sums `S_n(t)` on the grid for every replication, in order.
fn replicate(cfg: &ExperimentConfig, ex: &Exact, mode: PresampleMode, size_index: usize) -> Result<Vec<Vec<f64>>> {
    let n = ex.filter.n();
    let m_max = *ex.ms.last().expect("nonempty grid");
    let stream = |r: usize| ((size_index as u64) << 32) | r as u64;
    match mode {
        PresampleMode::Aggregated => {
            let gen = PathGenerator::near_field(
                &ex.filter.coefficients(m_max as usize),
                ex.innovation,
                m_max as usize,
                cfg.seed,
                &cfg.engine,
            )?;
            let k = ex.ms.len();
            let mut gram = presample_gram(&ex.filter, &ex.ms)?;
            gram.iter_mut().for_each(|g| *g *= ex.sigma2);
            let factor = factorize_psd(&gram, k)?;
            (0..cfg.reps)
                .into_par_iter()
                .map(|r| {
                    let (path, mut rng) = gen.path_with_rng(stream(r));
                    let mut s = partial_sums(&path, n, &cfg.t_grid)?;
                    for (si, pi) in s.iter_mut().zip(factor.sample(&mut rng)) {
                        *si += pi;
                    }
                    Ok(s)
                })
                .collect()
        }
        _ => {
            let path_cfg = PathConfig {
                filter: ex.filter.materialize(cfg.engine.capacity)?,
                innovation: cfg.innovation,
                n,
                t_grid: cfg.t_grid.clone(),
                seed: cfg.seed,
            };
            let gen = PathGenerator::new(&path_cfg, &cfg.engine)?;
            (0..cfg.reps)
                .into_par_iter()
                .map(|r| partial_sums(&gen.path(stream(r)), n, &cfg.t_grid))
                .collect()
        }
    }
}

fn column(sums: &[Vec<f64>], i: usize, scale: f64) -> Vec<f64> {
    sums.iter().map(|s| s[i] * scale).collect()
}

/// Partial sums `S_n(t)` of every replication at `n_list[size_index]`,
/// indexed `[rep][t]`, with the pre-sample mode actually used. These are
/// the draws [`run_experiment`] summarizes.
pub fn partial_sum_draws(cfg: &ExperimentConfig, size_index: usize) -> Result<(PresampleMode, Vec<Vec<f64>>)> {
    cfg.validate()?;
    let &n = cfg
        .n_list
        .get(size_index)
        .ok_or_else(|| Error::Domain(format!("no sample size at index {size_index}")))?;
    let spec = cfg.filter_spec()?;
    let law = LimitLaw::for_spec(&spec)?;
    let ex = exact_part(cfg, &spec, &law, n)?;
    let mode = resolve_mode(cfg, ex.filter.lambda(), *ex.ms.last().expect("nonempty grid"));
    Ok((mode, replicate(cfg, &ex, mode, size_index)?))
}

/// Runs `reps` seeded replications for every sample size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.filter_spec()?;
    let law = LimitLaw::for_spec(&spec)?;
    let delta = delta_for_case(cfg.case, cfg.beta)?;
    let pairs = cfg.pairs();
    let norm_index = cfg
        .t_grid
        .iter()
        .position(|&t| t == 1.0)
        .unwrap_or(cfg.t_grid.len() - 1);
    let mut sizes = Vec::with_capacity(cfg.n_list.len());
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let ex = exact_part(cfg, &spec, &law, n)?;
        let lambda = ex.filter.lambda();
        let mode = resolve_mode(cfg, lambda, *ex.ms.last().expect("nonempty grid"));
        let sums = replicate(cfg, &ex, mode, ni)?;
        let inv = 1.0 / ex.a_n_sq.sqrt();

        let points = (0..cfg.t_grid.len())
            .map(|i| {
                let z = column(&sums, i, inv);
                let (var_z, var_z_se) = if cfg.reps > 1 {
                    (variance(&z), variance_se(&z))
                } else {
                    (f64::NAN, f64::NAN)
                };
                let var_exact_z = ex.var_exact[i] / ex.a_n_sq;
                PointStats {
                    t: cfg.t_grid[i],
                    m: ex.ms[i],
                    var_z,
                    var_z_se,
                    var_exact: ex.var_exact[i],
                    var_exact_z,
                    w: ex.w[i],
                    var_ratio: var_exact_z / ex.w[i],
                }
            })
            .collect();

        let mut covariances = Vec::with_capacity(pairs.len());
        for &(i, l) in &pairs {
            let (zs, zt) = (column(&sums, i, inv), column(&sums, l, inv));
            let (cov_z, cov_z_se) = if cfg.reps > 1 {
                covariance_with_se(&zs, &zt)
            } else {
                (f64::NAN, f64::NAN)
            };
            let gap = ex.ms[i].abs_diff(ex.ms[l]);
            let var_gap = if gap == 0 {
                0.0
            } else {
                exact_variance(&profile_for_window(&ex.filter, gap)?, ex.sigma2)
            };
            let cov_exact = 0.5 * (ex.var_exact[i] + ex.var_exact[l] - var_gap);
            let (s, t) = (cfg.t_grid[i], cfg.t_grid[l]);
            covariances.push(CovarianceStats {
                s,
                t,
                cov_z,
                cov_z_se,
                cov_exact_z: cov_exact / ex.a_n_sq,
                kernel: law.covariance(s, t)?,
            });
        }

        let normality = if cfg.reps >= MIN_NORMALITY_SAMPLES {
            let s1 = column(&sums, norm_index, 1.0);
            Some(normality_with_scale(&s1, 0.0, ex.var_exact[norm_index].sqrt())?)
        } else {
            None
        };

        let p1 = profile_for(&ex.filter, 1.0)?;
        let lyapunov = lyapunov_fraction(&p1, &p1, delta, ex.innovation.moment_ratio(delta)?)?;

        sizes.push(SizeReport {
            n,
            lambda,
            sigma2: ex.sigma2,
            a_n_sq: ex.a_n_sq,
            presample: mode,
            points,
            covariances,
            normality_t: cfg.t_grid[norm_index],
            normality,
            delta,
            lyapunov,
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        sizes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub t: f64,
    pub m: u64,
    /// `⌊nt⌋ = 0`: no variance is defined and the other fields are empty.
    pub empty: bool,
    pub var_exact: Option<f64>,
    pub a_n_sq: f64,
    pub w: f64,
    /// `Var Z_n(t) / W(t)`.
    pub ratio: Option<f64>,
    /// `|ratio - 1|`.
    pub error: Option<f64>,
    /// The error grew relative to the previous `n` at the same `t`.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn is_monotone(&self) -> bool {
        !self.rows.iter().any(|r| r.non_monotone)
    }

    /// Rows for one grid point, in `n` order.
    pub fn at(&self, t: f64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.t == t)
    }
}

/// `|Var Z_n(t)/W(t) - 1|` over `n_list × t_grid` from exact coefficients;
/// no sampling. Rows are ordered by `n`, then `t`.
pub fn convergence_table(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let spec = cfg.filter_spec()?;
    cfg.innovation.validate()?;
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
        return domain("sample sizes must be positive");
    }
    check_grid(&cfg.t_grid)?;
    let law = LimitLaw::for_spec(&spec)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut last_error: Vec<Option<f64>> = vec![None; cfg.t_grid.len()];
    for &n in &cfg.n_list {
        let filter = Filter::new(&spec, n)?;
        let sigma2 = cfg.innovation.resolve(n)?.variance();
        let a_n_sq = law.normalizer_sq(n, filter_sum(&spec).ok())? * sigma2;
        for (i, &t) in cfg.t_grid.iter().enumerate() {
            let m = window_len(n, t)?;
            let w = law.w(t)?;
            let (var_exact, ratio, error) = match profile_for(&filter, t) {
                Ok(p) => {
                    let v = exact_variance(&p, sigma2);
                    let r = v / a_n_sq / w;
                    (Some(v), Some(r), Some((r - 1.0).abs()))
                }
                Err(Error::EmptyWindow { .. }) => (None, None, None),
                Err(e) => return Err(e),
            };
            let non_monotone = matches!((last_error[i], error), (Some(prev), Some(e)) if e > prev);
            if error.is_some() {
                last_error[i] = error;
            }
            rows.push(ConvergenceRow {
                n,
                t,
                m,
                empty: error.is_none(),
                var_exact,
                a_n_sq,
                w,
                ratio,
                error,
                non_monotone,
            });
        }
    }
    Ok(ConvergenceTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(CaseId::new(2).unwrap(), 2.0, 0.5, 1.0, vec![64], vec![0.5, 1.0]);
        cfg.reps = 2000;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn zero_reps_rejected() {
        let mut cfg = small_config();
        cfg.reps = 0;
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn soft_tapering_rejected() {
        let mut cfg = small_config();
        cfg.innovation = InnovationModel::TaperedPareto { alpha: 1.5, gamma: 0.8 };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("out of scope"));
    }

    #[test]
    fn mc_matches_exact_variance() {
        let rep = run_experiment(&small_config()).unwrap();
        let size = &rep.sizes[0];
        assert_eq!(size.lambda, 8);
        for p in &size.points {
            assert!((p.var_z - p.var_exact_z).abs() < 4.0 * p.var_z_se, "{p:?}");
        }
        let c = &size.covariances[0];
        assert!((c.cov_z - c.cov_exact_z).abs() < 4.0 * c.cov_z_se, "{c:?}");
    }

    #[test]
    fn iid_clt() {
        // a single tap: the partial sums are sums of i.i.d. innovations
        let path_cfg = PathConfig {
            filter: vec![1.0],
            innovation: InnovationModel::Gaussian,
            n: 50,
            t_grid: vec![1.0],
            seed: 3,
        };
        let gen = PathGenerator::new(&path_cfg, &EngineOptions::default()).unwrap();
        let z: Vec<f64> = (0..4000)
            .map(|r| partial_sums(&gen.path(r), 50, &[1.0]).unwrap()[0] / 50f64.sqrt())
            .collect();
        assert!((variance(&z) - 1.0).abs() < 4.0 * variance_se(&z));
    }

    #[test]
    fn deterministic() {
        let mut cfg = small_config();
        cfg.reps = 200;
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn empty_windows_flagged() {
        let cfg = ExperimentConfig::new(CaseId::new(2).unwrap(), 2.0, 0.5, 1.0, vec![10, 100], vec![0.05, 1.0]);
        let table = convergence_table(&cfg).unwrap();
        let first = &table.rows[0];
        assert!(first.empty && first.ratio.is_none());
        assert!(!table.rows[2].empty);
    }
}
