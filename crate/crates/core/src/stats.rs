//! Sample statistics: compensated moments, Kolmogorov–Smirnov distance to
//! the standard normal, and the normality summary used by experiments.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::special::normal_cdf;
use crate::numerics::KahanSum;

/// Minimum sample size accepted by [`normality_diagnostics`].
pub const MIN_NORMALITY_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normality {
    pub ks: f64,
    pub skew: f64,
    pub exkurt: f64,
    pub skew_se: f64,
    pub exkurt_se: f64,
    pub samples: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().sum() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).collect::<KahanSum>().sum();
    ss / (xs.len() as f64 - 1.0)
}

/// Estimated standard error of the sample variance,
/// `sqrt((m₄ - s⁴) / R)` from central moments.
pub fn variance_se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let r = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).collect::<KahanSum>().sum() / r;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).collect::<KahanSum>().sum() / r;
    ((m4 - m2 * m2).max(0.0) / r).sqrt()
}

/// Sample covariance and the standard error of its estimate.
pub fn covariance_with_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let r = xs.len() as f64;
    let cov = prods.iter().copied().collect::<KahanSum>().sum() / (r - 1.0);
    let mp = mean(&prods);
    let var_p = prods.iter().map(|p| (p - mp).powi(2)).collect::<KahanSum>().sum() / (r - 1.0);
    (cov, (var_p / r).sqrt())
}

/// `sup_x |F_R(x) - Φ(x)|` for samples already on the standard scale.
pub fn ks_distance_normal(standardized: &[f64]) -> f64 {
    let mut xs = standardized.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let r = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i as f64 + 1.0) / r - f).max(f - i as f64 / r);
    }
    d
}

fn shape_stats(xs: &[f64], center: f64, scale: f64) -> Result<Normality> {
    if xs.len() < MIN_NORMALITY_SAMPLES {
        return domain(format!(
            "normality diagnostics need at least {MIN_NORMALITY_SAMPLES} samples, got {}",
            xs.len()
        ));
    }
    let z: Vec<f64> = xs.iter().map(|x| (x - center) / scale).collect();
    let r = z.len() as f64;
    // shape statistics use population central moments of the standardized data
    let m = mean(&z);
    let m2 = z.iter().map(|x| (x - m).powi(2)).collect::<KahanSum>().sum() / r;
    if !(m2 > 0.0) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    let m3 = z.iter().map(|x| (x - m).powi(3)).collect::<KahanSum>().sum() / r;
    let m4 = z.iter().map(|x| (x - m).powi(4)).collect::<KahanSum>().sum() / r;
    Ok(Normality {
        ks: ks_distance_normal(&z),
        skew: m3 / m2.powf(1.5),
        exkurt: m4 / (m2 * m2) - 3.0,
        skew_se: (6.0 / r).sqrt(),
        exkurt_se: (24.0 / r).sqrt(),
        samples: z.len(),
    })
}

/// Normality statistics of samples standardized by their own mean and sd.
pub fn normality_diagnostics(samples: &[f64]) -> Result<Normality> {
    if samples.len() < MIN_NORMALITY_SAMPLES {
        return shape_stats(samples, 0.0, 1.0);
    }
    let m = mean(samples);
    let sd = variance(samples).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    shape_stats(samples, m, sd)
}

/// Normality statistics with a known mean and standard deviation
/// (e.g. the exact variance of a partial sum).
pub fn normality_with_scale(samples: &[f64], mean: f64, sd: f64) -> Result<Normality> {
    if !(sd > 0.0) {
        return Err(Error::Degenerate("standardizing scale must be positive".into()));
    }
    shape_stats(samples, mean, sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_law() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let n = normality_diagnostics(&xs).unwrap();
        assert!(n.skew.abs() < 1e-14);
        assert!((n.exkurt + 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_is_degenerate() {
        let xs = vec![3.0; 200];
        assert!(matches!(normality_diagnostics(&xs), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_few_samples() {
        assert!(normality_diagnostics(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn ks_of_quantiles_is_small() {
        // midpoint quantiles of N(0,1) give KS = 1/(2R)
        let r = 1000;
        let xs: Vec<f64> = (0..r)
            .map(|i| {
                let p = (i as f64 + 0.5) / r as f64;
                statrs::function::erf::erf_inv(2.0 * p - 1.0) * std::f64::consts::SQRT_2
            })
            .collect();
        assert!((ks_distance_normal(&xs) - 0.5 / r as f64).abs() < 1e-9);
    }
}
