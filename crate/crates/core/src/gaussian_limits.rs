//! Gaussian limit processes on finite grids, and the moving-average kernels
//! of tempered fractional Brownian motions for comparison.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{domain, Error, Result};
use crate::numerics::special::pow_diff;
use crate::numerics::{integrate, integrate_to_infinity, QuadOptions};

/// Relative pivot size below which a kernel is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

/// `½ (t^{2H} + s^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(h: f64) -> Result<impl Fn(f64, f64) -> f64 + Copy> {
    if !(h > 0.0 && h < 1.0) {
        return domain(format!("Hurst exponent must lie in (0, 1), got {h}"));
    }
    Ok(move |s: f64, t: f64| {
        let p = 2.0 * h;
        0.5 * (t.abs().powf(p) + s.abs().powf(p) - (t - s).abs().powf(p))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Factorization {
    Cholesky,
    /// Diagonally pivoted Cholesky truncated at numerical rank.
    Pivoted {
        rank: usize,
    },
    /// Cholesky of `K + εI`.
    Jittered {
        jitter: f64,
    },
}

/// `K ≈ L Lᵀ` with `L` of size `k × r`, row-major.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    k: usize,
    r: usize,
    l: Vec<f64>,
    strategy: Factorization,
}

impl PsdFactor {
    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn strategy(&self) -> Factorization {
        self.strategy
    }

    /// `L z` for `z` of length `rank()`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.r);
        (0..self.k)
            .map(|i| {
                self.l[i * self.r..(i + 1) * self.r]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `L Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let (k, r) = (self.k, self.r);
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = (0..r).map(|c| self.l[i * r + c] * self.l[j * r + c]).sum();
            }
        }
        out
    }

    /// Draws `L z` with `z` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.r).map(|_| StandardNormal.sample(rng)).collect();
        self.apply(&z)
    }
}

fn plain_cholesky(a: &[f64], k: usize, min_pivot: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0f64; k * k];
    for j in 0..k {
        let d = a[j * k + j] - (0..j).map(|c| l[j * k + c].powi(2)).sum::<f64>();
        if !(d > min_pivot) {
            return None;
        }
        let piv = d.sqrt();
        l[j * k + j] = piv;
        for i in j + 1..k {
            let s = a[i * k + j] - (0..j).map(|c| l[i * k + c] * l[j * k + c]).sum::<f64>();
            l[i * k + j] = s / piv;
        }
    }
    Some(l)
}

// Ok((factor, rank)) or Err(most negative residual pivot)
fn pivoted_cholesky(a: &[f64], k: usize, tol: f64) -> std::result::Result<(Vec<f64>, usize), f64> {
    let mut l = vec![0.0f64; k * k];
    let mut diag: Vec<f64> = (0..k).map(|i| a[i * k + i]).collect();
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    while !remaining.is_empty() {
        let (pos, &piv) = remaining
            .iter()
            .enumerate()
            .max_by(|x, y| diag[*x.1].total_cmp(&diag[*y.1]))
            .expect("nonempty");
        if diag[piv] <= tol {
            break;
        }
        remaining.swap_remove(pos);
        let root = diag[piv].sqrt();
        l[piv * k + rank] = root;
        for &i in &remaining {
            let s = a[i * k + piv] - (0..rank).map(|c| l[i * k + c] * l[piv * k + c]).sum::<f64>();
            let v = s / root;
            l[i * k + rank] = v;
            diag[i] -= v * v;
        }
        rank += 1;
    }
    let worst = remaining.iter().map(|&i| diag[i]).fold(f64::INFINITY, f64::min);
    if worst < -tol {
        return Err(worst);
    }
    // compact to k × rank
    let mut out = vec![0.0; k * rank];
    for i in 0..k {
        out[i * rank..(i + 1) * rank].copy_from_slice(&l[i * k..i * k + rank]);
    }
    Ok((out, rank))
}

/// Factorizes a symmetric positive semidefinite `k × k` matrix.
///
/// Plain Cholesky is tried first. If a pivot falls below `1e-10 · trace`
/// the matrix is treated as rank deficient and factorized by diagonally
/// pivoted Cholesky truncated at that tolerance, which keeps exactly
/// low-rank kernels (such as `K(s,t) = st`) exactly low rank. If that finds
/// a clearly negative residual, diagonal jitter from `1e-12 · trace` up to
/// `1e-6 · trace` is tried before giving up.
pub fn factorize_psd(cov: &[f64], k: usize) -> Result<PsdFactor> {
    if cov.len() != k * k || k == 0 {
        return domain(format!("covariance must be {k} x {k}"));
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("covariance has non-finite entries".into()));
    }
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (cov[i * k + j], cov[j * k + i]);
            if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
                return domain("covariance matrix is not symmetric");
            }
        }
    }
    let trace: f64 = (0..k).map(|i| cov[i * k + i]).sum();
    if !(trace > 0.0) {
        return Err(Error::Degenerate("covariance has zero trace".into()));
    }
    let tol = RANK_TOL * trace;
    if let Some(l) = plain_cholesky(cov, k, tol) {
        return Ok(PsdFactor {
            k,
            r: k,
            l,
            strategy: Factorization::Cholesky,
        });
    }
    let worst = match pivoted_cholesky(cov, k, tol) {
        Ok((l, r)) => {
            return Ok(PsdFactor {
                k,
                r,
                l,
                strategy: Factorization::Pivoted { rank: r },
            })
        }
        Err(w) => w,
    };
    let mut eps = JITTER_START * trace;
    while eps <= JITTER_MAX * trace * (1.0 + 1e-12) {
        let mut a = cov.to_vec();
        for i in 0..k {
            a[i * k + i] += eps;
        }
        if let Some(l) = plain_cholesky(&a, k, 0.0) {
            return Ok(PsdFactor {
                k,
                r: k,
                l,
                strategy: Factorization::Jittered { jitter: eps },
            });
        }
        eps *= 10.0;
    }
    Err(Error::Numerical(format!(
        "covariance is indefinite beyond the jitter budget: residual pivot {worst:e}, trace {trace:e}, \
         largest jitter tried {:e}",
        JITTER_MAX * trace
    )))
}

/// A centered Gaussian process on a finite grid.
#[derive(Debug, Clone)]
pub struct GaussianGridProcess {
    grid: Vec<f64>,
    cov: Vec<f64>,
    factor: PsdFactor,
}

impl GaussianGridProcess {
    pub fn new<K: Fn(f64, f64) -> f64>(grid: &[f64], kernel: K) -> Result<GaussianGridProcess> {
        crate::path_engine::check_grid(grid)?;
        let k = grid.len();
        let mut cov = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = kernel(grid[i], grid[j]);
                cov[i * k + j] = v;
                cov[j * k + i] = v;
            }
        }
        let factor = factorize_psd(&cov, k)?;
        Ok(GaussianGridProcess {
            grid: grid.to_vec(),
            cov,
            factor,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn covariance(&self) -> &[f64] {
        &self.cov
    }

    pub fn factor(&self) -> &PsdFactor {
        &self.factor
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.factor.sample(rng)
    }
}

/// One path of the Gaussian process with covariance `kernel` on `grid`.
pub fn sample_gaussian<K: Fn(f64, f64) -> f64, R: Rng + ?Sized>(
    grid: &[f64],
    kernel: K,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(GaussianGridProcess::new(grid, kernel)?.sample(rng))
}

/// `x^p` for `x > 0`, and `0` for `x ≤ 0` whatever the sign of `p`.
#[inline]
fn trunc_pow(x: f64, p: f64) -> f64 {
    if x > 0.0 {
        x.powf(p)
    } else {
        0.0
    }
}

/// `(t-x)_+^{p} e^{-λ(t-x)_+} - (-x)_+^{p} e^{-λ(-x)_+}`.
fn tempered_difference(x: f64, t: f64, p: f64, lambda: f64) -> f64 {
    if x >= t {
        return 0.0;
    }
    if x < 0.0 && lambda == 0.0 {
        return pow_diff(-x, t, p);
    }
    let u = t - x;
    let v = (-x).max(0.0);
    trunc_pow(u, p) * (-lambda * u).exp() - trunc_pow(v, p) * (-lambda * v).exp()
}

/// Kernel of the tempered fractional Brownian motion,
/// `g(x) = (t-x)_+^{-α} e^{-λ(t-x)_+} - (-x)_+^{-α} e^{-λ(-x)_+}`.
pub fn tfbm_kernel(alpha: f64, lambda: f64, t: f64) -> Result<impl Fn(f64) -> f64 + Copy> {
    if !(alpha < 0.5) || !alpha.is_finite() {
        return domain(format!("alpha must be below 1/2, got {alpha}"));
    }
    check_tempering(lambda, t)?;
    Ok(move |x: f64| tempered_difference(x, t, -alpha, lambda))
}

/// Which integral term the second-kind kernel carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tfbm2Prefactor {
    /// `λ ∫_0^t …`: reduces to fractional Brownian motion at `λ = 0`.
    Lambda,
    /// `∫_0^t …` without a prefactor.
    Bare,
}

/// `∫_0^t (s-x)_+^{a} e^{-λ(s-x)_+} ds`.
fn tempered_integral(x: f64, t: f64, a: f64, lambda: f64) -> f64 {
    if x >= t {
        return 0.0;
    }
    let (hi, lo) = (t - x, (-x).max(0.0));
    let q = a + 1.0;
    if lambda == 0.0 {
        if lo > 0.0 {
            pow_diff(lo, hi - lo, q) / q
        } else {
            hi.powf(q) / q
        }
    } else {
        let lower = |v: f64| if v > 0.0 { gamma_lr(q, lambda * v) } else { 0.0 };
        lambda.powf(-q) * gamma(q) * (lower(hi) - lower(lo))
    }
}

/// Kernel of the tempered fractional Brownian motion of the second kind,
/// `h(x) = (t-x)_+^{H-½} e^{-λ(t-x)_+} - (-x)_+^{H-½} e^{-λ(-x)_+}
/// + κ ∫_0^t (s-x)_+^{H-½} e^{-λ(s-x)_+} ds`, where `κ` is `λ` or 1.
pub fn tfbm2_kernel(h: f64, lambda: f64, t: f64, prefactor: Tfbm2Prefactor) -> Result<impl Fn(f64) -> f64 + Copy> {
    if !(h > 0.0 && h < 1.0) {
        return domain(format!("Hurst exponent must lie in (0, 1), got {h}"));
    }
    check_tempering(lambda, t)?;
    let a = h - 0.5;
    let kappa = match prefactor {
        Tfbm2Prefactor::Lambda => lambda,
        Tfbm2Prefactor::Bare => 1.0,
    };
    Ok(move |x: f64| {
        let base = tempered_difference(x, t, a, lambda);
        if kappa == 0.0 {
            base
        } else {
            base + kappa * tempered_integral(x, t, a, lambda)
        }
    })
}

fn check_tempering(lambda: f64, t: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!("lambda must be nonnegative, got {lambda}"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("t must be nonnegative, got {t}"));
    }
    Ok(())
}

/// `∫_{-∞}^{t} k(x)² dx`, split at `-t`, `0` and `t`.
pub fn kernel_variance<K: Fn(f64) -> f64>(kernel: K, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let opts = QuadOptions::with_tol(0.0, 1e-11);
    let sq = |x: f64| kernel(x).powi(2);
    let inner = integrate(sq, 0.0, t, opts)?.value + integrate(sq, -t, 0.0, opts)?.value;
    let tail = integrate_to_infinity(|y: f64| sq(-y), t, t, opts)?.value;
    let v = inner + tail;
    if !v.is_finite() {
        return Err(Error::Numerical("kernel is not square integrable".into()));
    }
    Ok(v)
}

pub fn tfbm_variance(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    kernel_variance(tfbm_kernel(alpha, lambda, t)?, t)
}

pub fn tfbm2_variance(h: f64, lambda: f64, t: f64, prefactor: Tfbm2Prefactor) -> Result<f64> {
    kernel_variance(tfbm2_kernel(h, lambda, t, prefactor)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fbm_examples() {
        let k = fbm_covariance(0.5).unwrap();
        assert!((k(0.3, 0.7) - 0.3).abs() < 1e-15);
        let k = fbm_covariance(0.75).unwrap();
        assert!((k(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((k(1.0, 2.0) - 2f64.sqrt()).abs() < 1e-12);
        assert!(fbm_covariance(1.0).is_err());
    }

    #[test]
    fn rank_one_kernel_stays_rank_one() {
        let grid = [0.25, 0.5, 1.0, 2.0];
        let p = GaussianGridProcess::new(&grid, |s, t| s * t).unwrap();
        assert_eq!(p.factor().strategy(), Factorization::Pivoted { rank: 1 });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path = p.sample(&mut rng);
        let r0 = path[0] / grid[0];
        for (x, t) in path.iter().zip(&grid) {
            assert!((x / t - r0).abs() <= 1e-12 * r0.abs().max(1.0));
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let cov = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(factorize_psd(&cov, 2), Err(Error::Numerical(_))));
    }

    #[test]
    fn kernels_vanish_beyond_t() {
        let g = tfbm_kernel(0.2, 0.5, 1.0).unwrap();
        assert_eq!(g(1.5), 0.0);
        let h = tfbm2_kernel(0.75, 1.0, 1.0, Tfbm2Prefactor::Lambda).unwrap();
        assert_eq!(h(2.0), 0.0);
        assert_eq!(tfbm2_variance(0.75, 1.0, 0.0, Tfbm2Prefactor::Lambda).unwrap(), 0.0);
    }

    #[test]
    fn small_t_kernel_cancels() {
        let g = tfbm_kernel(0.2, 0.5, 1e-9).unwrap();
        assert!(g(-1.0).abs() < 1e-8);
    }

    #[test]
    fn tempered_integral_matches_quadrature() {
        let (a, lam, t) = (0.25, 1.3, 1.0);
        for &x in &[-2.0, -0.3, 0.4] {
            let q = integrate(
                |s: f64| trunc_pow(s - x, a) * (-lam * (s - x).max(0.0)).exp(),
                0.0,
                t,
                QuadOptions::with_tol(0.0, 1e-12),
            )
            .unwrap()
            .value;
            assert!((tempered_integral(x, t, a, lam) - q).abs() < 1e-10, "x={x}");
        }
    }
}
