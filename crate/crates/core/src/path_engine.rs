//! Sample paths `X_k = Σ_{i=0}^{λ} ã_i ξ_{k-i}`, `k = 1..M`, and their
//! partial sums.
//!
//! A path consumes `λ + M` innovations `ξ_{1-λ}, …, ξ_M`, drawn in that
//! order from a ChaCha8 stream selected by `(seed, stream)`. Long
//! convolutions go through a real FFT of size `next_pow2(λ + M)`: outputs
//! with index below `λ` are the ones contaminated by wrap-around and are
//! exactly the ones discarded.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::coefficients::window_len;
use crate::error::{domain, Error, Result};
use crate::innovations::{Innovation, InnovationModel};
use crate::numerics::KahanSum;

/// Tuning knobs for path generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineOptions {
    /// Use the FFT when `λ + M` exceeds this.
    pub fft_threshold: usize,
    /// Largest `λ + M` accepted.
    pub capacity: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            fft_threshold: 4096,
            capacity: 1 << 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMethod {
    Direct,
    Fft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    /// `ã_0..ã_λ`.
    pub filter: Vec<f64>,
    pub innovation: InnovationModel,
    pub n: u64,
    pub t_grid: Vec<f64>,
    pub seed: u64,
}

impl PathConfig {
    /// `M = ⌊n · max(t_grid)⌋` after validating the grid.
    pub fn path_len(&self) -> Result<usize> {
        check_grid(&self.t_grid)?;
        if self.filter.is_empty() {
            return domain("filter must contain at least a_0");
        }
        let t_max = *self.t_grid.last().expect("nonempty grid");
        Ok(window_len(self.n, t_max)? as usize)
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return domain("t grid is empty");
    }
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return domain("t grid values must be positive and finite");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("t grid must be strictly increasing");
    }
    Ok(())
}

struct FftPlan {
    size: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    spectrum: Vec<Complex<f64>>,
}

/// Reusable generator: the filter spectrum is computed once and shared by
/// every replication.
pub struct PathGenerator {
    filter: Vec<f64>,
    // number of leading input slots before ξ_1
    lead: usize,
    presample: bool,
    m: usize,
    innovation: Innovation,
    seed: u64,
    fft: Option<FftPlan>,
}

impl std::fmt::Debug for PathGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PathGenerator")
            .field("lambda", &self.lead)
            .field("m", &self.m)
            .field("presample", &self.presample)
            .field("method", &self.method())
            .finish()
    }
}

impl PathGenerator {
    pub fn new(config: &PathConfig, opts: &EngineOptions) -> Result<PathGenerator> {
        let m = config.path_len()?;
        let innovation = config.innovation.resolve(config.n)?;
        Self::build(config.filter.clone(), innovation, m, config.seed, true, opts)
    }

    /// Generator for the part of the path driven by `ξ_1..ξ_M` only: the
    /// filter is cut to `ã_0..ã_{M-1}` and no pre-sample innovations are
    /// drawn. Adding an independent draw of the pre-sample contribution
    /// recovers the full process.
    pub fn near_field(
        filter: &[f64],
        innovation: Innovation,
        m: usize,
        seed: u64,
        opts: &EngineOptions,
    ) -> Result<PathGenerator> {
        if m == 0 {
            return domain("path length must be positive");
        }
        let mut cut: Vec<f64> = filter.iter().copied().take(m).collect();
        cut.resize(m, 0.0);
        Self::build(cut, innovation, m, seed, false, opts)
    }

    fn build(
        filter: Vec<f64>,
        innovation: Innovation,
        m: usize,
        seed: u64,
        presample: bool,
        opts: &EngineOptions,
    ) -> Result<PathGenerator> {
        if filter.is_empty() {
            return domain("filter must contain at least a_0");
        }
        let lead = filter.len() - 1;
        let total = lead + m;
        if total > opts.capacity {
            return Err(Error::Capacity {
                requested: total,
                cap: opts.capacity,
            });
        }
        let fft = if total > opts.fft_threshold {
            let size = total.next_power_of_two();
            let mut planner = RealFftPlanner::<f64>::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut input = forward.make_input_vec();
            input[..filter.len()].copy_from_slice(&filter);
            let mut spectrum = forward.make_output_vec();
            forward
                .process(&mut input, &mut spectrum)
                .map_err(|e| Error::Numerical(format!("FFT failed: {e}")))?;
            Some(FftPlan {
                size,
                forward,
                inverse,
                spectrum,
            })
        } else {
            None
        };
        Ok(PathGenerator {
            filter,
            lead,
            presample,
            m,
            innovation,
            seed,
            fft,
        })
    }

    pub fn method(&self) -> ConvolutionMethod {
        if self.fft.is_some() {
            ConvolutionMethod::Fft
        } else {
            ConvolutionMethod::Direct
        }
    }

    /// Path length `M`.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn innovation(&self) -> &Innovation {
        &self.innovation
    }

    /// Random stream for replication `stream`.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Number of innovations one path consumes.
    pub fn innovations_needed(&self) -> usize {
        if self.presample {
            self.lead + self.m
        } else {
            self.m
        }
    }

    /// Path for replication `stream`, together with the stream state after
    /// the innovations were drawn.
    pub fn path_with_rng(&self, stream: u64) -> (Vec<f64>, ChaCha8Rng) {
        let mut rng = self.rng(stream);
        let mut xi = vec![0.0; self.innovations_needed()];
        self.innovation.fill(&mut rng, &mut xi);
        (self.convolve(&xi).expect("length matches"), rng)
    }

    pub fn path(&self, stream: u64) -> Vec<f64> {
        self.path_with_rng(stream).0
    }

    /// `X_1..X_M` from explicit innovations: `ξ_{1-λ}..ξ_M`, or `ξ_1..ξ_M`
    /// for a near-field generator.
    pub fn convolve(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.innovations_needed() {
            return domain(format!(
                "expected {} innovations, got {}",
                self.innovations_needed(),
                xi.len()
            ));
        }
        let offset = self.lead + self.m - xi.len();
        match &self.fft {
            None => {
                let mut x = vec![0.0; self.lead + self.m];
                x[offset..].copy_from_slice(xi);
                Ok(direct(&self.filter, &x, self.lead, self.m))
            }
            Some(plan) => {
                let mut input = plan.forward.make_input_vec();
                input[offset..offset + xi.len()].copy_from_slice(xi);
                let mut spec = plan.forward.make_output_vec();
                plan.forward
                    .process(&mut input, &mut spec)
                    .map_err(|e| Error::Numerical(format!("FFT failed: {e}")))?;
                for (s, f) in spec.iter_mut().zip(&plan.spectrum) {
                    *s *= f;
                }
                // the DC and Nyquist bins of a real signal are real
                spec[0].im = 0.0;
                let last = spec.len() - 1;
                spec[last].im = 0.0;
                let mut out = plan.inverse.make_output_vec();
                plan.inverse
                    .process(&mut spec, &mut out)
                    .map_err(|e| Error::Numerical(format!("inverse FFT failed: {e}")))?;
                let scale = 1.0 / plan.size as f64;
                Ok(out[self.lead..self.lead + self.m].iter().map(|v| v * scale).collect())
            }
        }
    }
}

fn direct(filter: &[f64], x: &[f64], lead: usize, m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let r = k + lead;
            filter.iter().enumerate().map(|(i, a)| a * x[r - i]).sum()
        })
        .collect()
}

/// Reference convolution: `X_k = Σ_{i=0}^{λ} ã_i ξ_{k-i}` where `xi`
/// holds `ξ_{1-λ}..ξ_M`.
pub fn naive_convolution(filter: &[f64], xi: &[f64]) -> Vec<f64> {
    let lead = filter.len().saturating_sub(1);
    let m = xi.len().saturating_sub(lead);
    direct(filter, xi, lead, m)
}

/// One path for `config`, using replication stream 0.
pub fn generate_path(config: &PathConfig) -> Result<Vec<f64>> {
    Ok(PathGenerator::new(config, &EngineOptions::default())?.path(0))
}

/// `S_n(t) = Σ_{k=1}^{⌊nt⌋} X_k` for each `t` in an increasing grid, from
/// one compensated cumulative pass.
pub fn partial_sums(path: &[f64], n: u64, t_grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(t_grid)?;
    let ms: Vec<usize> = t_grid
        .iter()
        .map(|&t| window_len(n, t).map(|m| m as usize))
        .collect::<Result<_>>()?;
    let need = *ms.last().expect("nonempty grid");
    if path.len() < need {
        return domain(format!("path has {} values, {need} needed", path.len()));
    }
    let mut out = Vec::with_capacity(ms.len());
    let mut acc = KahanSum::new();
    let mut k = 0;
    for &m in &ms {
        while k < m {
            acc.add(path[k]);
            k += 1;
        }
        out.push(acc.sum());
    }
    Ok(out)
}

/// `S / sqrt(A²)`.
pub fn z_values(s: &[f64], a2: f64) -> Result<Vec<f64>> {
    if !(a2 > 0.0) || !a2.is_finite() {
        return domain(format!("A_n^2 must be positive, got {a2}"));
    }
    let a = a2.sqrt();
    Ok(s.iter().map(|v| v / a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(filter: Vec<f64>, n: u64, t: Vec<f64>) -> PathConfig {
        PathConfig {
            filter,
            innovation: InnovationModel::Gaussian,
            n,
            t_grid: t,
            seed: 11,
        }
    }

    #[test]
    fn lambda_zero_is_identity() {
        let g = PathGenerator::new(&config(vec![1.0], 10, vec![1.0]), &EngineOptions::default()).unwrap();
        let xi: Vec<f64> = (0..10).map(|i| i as f64 - 3.5).collect();
        assert_eq!(g.convolve(&xi).unwrap(), xi);
    }

    #[test]
    fn two_tap_by_hand() {
        let g = PathGenerator::new(&config(vec![1.0, 1.0], 2, vec![1.0]), &EngineOptions::default()).unwrap();
        // ξ_0, ξ_1, ξ_2
        let x = g.convolve(&[1.0, -1.0, 2.0]).unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
    }

    #[test]
    fn fft_matches_direct() {
        let filter: Vec<f64> = (0..300).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let cfg = config(filter.clone(), 1000, vec![1.0]);
        let fft = PathGenerator::new(
            &cfg,
            &EngineOptions {
                fft_threshold: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(fft.method(), ConvolutionMethod::Fft);
        let (p, _) = fft.path_with_rng(3);
        let mut rng = fft.rng(3);
        let mut xi = vec![0.0; 1299];
        fft.innovation().fill(&mut rng, &mut xi);
        let q = naive_convolution(&filter, &xi);
        let scale = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn partial_sum_examples() {
        let ones = vec![1.0; 10];
        assert_eq!(partial_sums(&ones, 10, &[0.5]).unwrap(), vec![5.0]);
        assert_eq!(partial_sums(&ones, 10, &[0.05, 1.0]).unwrap(), vec![0.0, 10.0]);
        assert!(partial_sums(&ones, 10, &[2.0]).is_err());
        assert!(partial_sums(&ones, 10, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn z_value_examples() {
        assert_eq!(z_values(&[2.0], 4.0).unwrap(), vec![1.0]);
        assert_eq!(z_values(&[3.0, -1.0], 1.0).unwrap(), vec![3.0, -1.0]);
        assert!(z_values(&[1.0], 0.0).is_err());
    }

    #[test]
    fn capacity_is_enforced() {
        let cfg = config(vec![1.0; 100], 1000, vec![1.0]);
        let err = PathGenerator::new(
            &cfg,
            &EngineOptions {
                capacity: 500,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }
}
