//! Innovation laws: standard and tapered Pareto variables, standardized
//! light-tailed laws and the Gaussian.
//!
//! The tapered Pareto variable is `ζ = θ 1[θ < b] + (b + R) 1[θ ≥ b]` with
//! `θ ~ Pareto(α)` and `R ~ Exp(1)` independent. Its density follows from
//! that definition: `α x^{-α-1}` on `[1, b)` and `b^{-α} e^{-(x-b)}` on
//! `[b, ∞)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::filters::{classify_innovation_taper, InnovationTaper};
use crate::numerics::special::{gaussian_abs_moment, pow_minus_one_over, upper_gamma_scaled};
use crate::numerics::{integrate, integrate_to_infinity, QuadOptions};

fn quad_opts() -> QuadOptions {
    QuadOptions::with_tol(0.0, 1e-13)
}

/// Standard Pareto law on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoSpec {
    alpha: f64,
}

impl ParetoSpec {
    pub fn new(alpha: f64) -> Result<ParetoSpec> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("Pareto alpha must be positive, got {alpha}"));
        }
        Ok(ParetoSpec { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// `F(x) = 1 - x^{-α}` for `x ≥ 1`.
pub fn pareto_cdf(spec: &ParetoSpec, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return domain(format!("Pareto CDF is defined for x >= 1, got {x}"));
    }
    Ok(-(-spec.alpha * x.ln()).exp_m1())
}

/// Tapered Pareto law with tail exponent `α` and tapering level `b ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperedParetoSpec {
    alpha: f64,
    b: f64,
}

impl TaperedParetoSpec {
    /// `b = 1` is admitted: then `ζ = 1 + R` exactly.
    pub fn new(alpha: f64, b: f64) -> Result<TaperedParetoSpec> {
        ParetoSpec::new(alpha)?;
        if !(b >= 1.0) || !b.is_finite() {
            return domain(format!("tapering level must satisfy b >= 1, got {b}"));
        }
        Ok(TaperedParetoSpec { alpha, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn density(&self, x: f64) -> f64 {
        tapered_pareto_density(self, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.b);
        if x < 1.0 {
            0.0
        } else if x < b {
            -(-a * x.ln()).exp_m1()
        } else {
            1.0 - (-a * b.ln() - (x - b)).exp()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_tapered_pareto(self, rng)
    }

    /// `Eζ`.
    pub fn mean(&self) -> f64 {
        moment_zeta(self, 1.0).expect("r = 1 is valid")
    }

    /// `Var ζ = Eξ²`.
    pub fn variance(&self) -> f64 {
        let m1 = self.mean();
        moment_zeta(self, 2.0).expect("r = 2 is valid") - m1 * m1
    }
}

pub fn tapered_pareto_density(spec: &TaperedParetoSpec, x: f64) -> f64 {
    let (a, b) = (spec.alpha, spec.b);
    if x < 1.0 {
        0.0
    } else if x < b {
        a * x.powf(-a - 1.0)
    } else {
        (-a * b.ln() - (x - b)).exp()
    }
}

/// Inverse-CDF draw of `θ`; values at or above `b` are replaced by
/// `b + R`. Consumes one uniform, plus one exponential when tapered.
pub fn sample_tapered_pareto<R: Rng + ?Sized>(spec: &TaperedParetoSpec, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    // 1 - u lies in (0, 1]
    let theta = (-(1.0 - u).ln() / spec.alpha).exp();
    if theta < spec.b {
        theta
    } else {
        let r: f64 = Exp1.sample(rng);
        spec.b + r
    }
}

/// `Eζ^r = α (b^{r-α} - 1)/(r - α) + b^{-α} e^b Γ(r+1, b)`.
///
/// The first term is `α ln b` at `r = α`. The scaled incomplete gamma
/// never forms `e^b`, so large `b` does not overflow.
pub fn moment_zeta(spec: &TaperedParetoSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("moment order must be positive, got {r}"));
    }
    let (a, b) = (spec.alpha, spec.b);
    let pareto_part = a * pow_minus_one_over(b, r - a);
    let taper_part = (-a * b.ln()).exp() * upper_gamma_scaled(r + 1.0, b)?;
    Ok(pareto_part + taper_part)
}

/// `E|ζ - Eζ|^p` by adaptive quadrature over the density, split at the
/// mean and at `b`.
pub fn centered_abs_moment(spec: &TaperedParetoSpec, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("centered moment order must be >= 1, got {p}"));
    }
    let (a, b) = (spec.alpha, spec.b);
    let mu = spec.mean();
    // Pareto branch on [1, b), in the variable s = ln x
    let mut pareto = 0.0;
    if b > 1.0 {
        let f = |s: f64| {
            let x = s.exp();
            (x - mu).abs().powf(p) * a * (-a * s).exp()
        };
        let lb = b.ln();
        let mut points = vec![0.0];
        if mu > 1.0 && mu < b {
            points.push(mu.ln());
        }
        points.push(lb);
        pareto = crate::numerics::integrate_with_breaks(f, &points, quad_opts())?.value;
    }
    // exponential branch b + y, y ≥ 0, weight b^{-α} e^{-y}
    let g = |y: f64| (b + y - mu).abs().powf(p) * (-y).exp();
    let scale = 4.0 + p;
    let taper = if mu > b {
        let kink = mu - b;
        integrate(g, 0.0, kink, quad_opts())?.value + integrate_to_infinity(g, kink, scale, quad_opts())?.value
    } else {
        integrate_to_infinity(g, 0.0, scale, quad_opts())?.value
    };
    Ok(pareto + (-a * b.ln()).exp() * taper)
}

/// `E|ξ|^{2+δ} / (E|ξ|²)^{(2+δ)/2}` for the centered tapered variable.
pub fn moment_ratio(spec: &TaperedParetoSpec, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let num = centered_abs_moment(spec, 2.0 + delta)?;
    Ok(num / spec.variance().powf(1.0 + 0.5 * delta))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    Ok(())
}

/// Light-tailed laws that can be standardized to mean 0, variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseDistribution {
    /// Uniform on `[0, 1]`.
    Uniform,
    /// Standard exponential.
    Exponential,
    /// `±1` with probability 1/2.
    Rademacher,
    /// Laplace with unit scale.
    Laplace,
}

impl BaseDistribution {
    pub fn mean(self) -> f64 {
        match self {
            BaseDistribution::Uniform => 0.5,
            BaseDistribution::Exponential => 1.0,
            BaseDistribution::Rademacher | BaseDistribution::Laplace => 0.0,
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            BaseDistribution::Uniform => 1.0 / 12.0,
            BaseDistribution::Exponential | BaseDistribution::Rademacher => 1.0,
            BaseDistribution::Laplace => 2.0,
        }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            BaseDistribution::Uniform => rng.gen::<f64>(),
            BaseDistribution::Exponential => Exp1.sample(rng),
            BaseDistribution::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BaseDistribution::Laplace => {
                let e: f64 = Exp1.sample(rng);
                if rng.gen::<bool>() {
                    e
                } else {
                    -e
                }
            }
        }
    }

    /// `E|X|^p` of the standardized variable.
    fn standardized_abs_moment(self, p: f64) -> Result<f64> {
        Ok(match self {
            BaseDistribution::Uniform => 3f64.sqrt().powf(p) / (p + 1.0),
            BaseDistribution::Rademacher => 1.0,
            BaseDistribution::Laplace => statrs::function::gamma::gamma(p + 1.0) / 2f64.sqrt().powf(p),
            BaseDistribution::Exponential => {
                let f = |y: f64| (y - 1.0).abs().powf(p) * (-y).exp();
                integrate(f, 0.0, 1.0, quad_opts())?.value + integrate_to_infinity(f, 1.0, 4.0 + p, quad_opts())?.value
            }
        })
    }
}

/// Innovation law before the sample size is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InnovationModel {
    Gaussian,
    Standardized {
        base: BaseDistribution,
    },
    /// `ξ = ζ(α, b) - Eζ(α, b)` with `b = n^γ`.
    TaperedPareto {
        alpha: f64,
        gamma: f64,
    },
}

impl InnovationModel {
    pub fn validate(&self) -> Result<()> {
        if let InnovationModel::TaperedPareto { alpha, gamma } = *self {
            ParetoSpec::new(alpha)?;
            if !(gamma > 0.0) || !gamma.is_finite() {
                return domain(format!("gamma must be positive, got {gamma}"));
            }
        }
        Ok(())
    }

    /// Tapering class of a tapered-Pareto model; `None` otherwise.
    pub fn taper_class(&self) -> Option<Result<InnovationTaper>> {
        match *self {
            InnovationModel::TaperedPareto { alpha, gamma } => Some(classify_innovation_taper(gamma, alpha)),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, InnovationModel::Gaussian)
    }

    /// Fixes the sample size, resolving `b(n) = n^γ`.
    pub fn resolve(&self, n: u64) -> Result<Innovation> {
        self.validate()?;
        Ok(match *self {
            InnovationModel::Gaussian => Innovation::Gaussian,
            InnovationModel::Standardized { base } => Innovation::Standardized {
                base,
                mean: base.mean(),
                sd: base.variance().sqrt(),
            },
            InnovationModel::TaperedPareto { alpha, gamma } => {
                let spec = TaperedParetoSpec::new(alpha, (n as f64).powf(gamma))?;
                Innovation::TaperedPareto {
                    spec,
                    mean: spec.mean(),
                    variance: spec.variance(),
                }
            }
        })
    }
}

/// An innovation law with every parameter fixed; samples are centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovation {
    Gaussian,
    Standardized {
        base: BaseDistribution,
        mean: f64,
        sd: f64,
    },
    TaperedPareto {
        spec: TaperedParetoSpec,
        mean: f64,
        variance: f64,
    },
}

impl Innovation {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Innovation::Gaussian => StandardNormal.sample(rng),
            Innovation::Standardized { base, mean, sd } => (base.sample(rng) - mean) / sd,
            Innovation::TaperedPareto { spec, mean, .. } => sample_tapered_pareto(spec, rng) - mean,
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.sample(rng);
        }
    }

    /// `Eξ²`.
    pub fn variance(&self) -> f64 {
        match self {
            Innovation::TaperedPareto { variance, .. } => *variance,
            _ => 1.0,
        }
    }

    /// `E|ξ|^p`.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        match self {
            Innovation::Gaussian => Ok(gaussian_abs_moment(p)),
            Innovation::Standardized { base, .. } => base.standardized_abs_moment(p),
            Innovation::TaperedPareto { spec, .. } => centered_abs_moment(spec, p),
        }
    }

    /// `E|ξ|^{2+δ} / (Eξ²)^{(2+δ)/2}`.
    pub fn moment_ratio(&self, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        Ok(self.abs_moment(2.0 + delta)? / self.variance().powf(1.0 + 0.5 * delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pareto_cdf_examples() {
        assert!((pareto_cdf(&ParetoSpec::new(1.0).unwrap(), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(pareto_cdf(&ParetoSpec::new(2.0).unwrap(), 1.0).unwrap(), 0.0);
        assert!((pareto_cdf(&ParetoSpec::new(0.5).unwrap(), 16.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(pareto_cdf(&ParetoSpec::new(0.5).unwrap(), 0.5).is_err());
        assert!(ParetoSpec::new(0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let s = TaperedParetoSpec::new(2.0, 2.0).unwrap();
        assert!((s.density(1.5) - 2.0 / 3.375).abs() < 1e-15);
        assert!((s.density(2.0) - 0.25).abs() < 1e-15);
        assert_eq!(s.density(0.9), 0.0);
        // density is the derivative of the CDF
        for &x in &[1.2, 1.9, 2.0, 2.5, 7.0] {
            let h = 1e-6;
            let num = (s.cdf(x + h) - s.cdf(x - h.min(x - 1.0))) / (h + h.min(x - 1.0));
            assert!((num - s.density(x)).abs() < 1e-5, "x={x}");
        }
    }

    #[test]
    fn moment_examples() {
        let s = TaperedParetoSpec::new(2.0, 2.0).unwrap();
        assert!((moment_zeta(&s, 1.0).unwrap() - 1.75).abs() < 1e-13);
        let expect = 2.0 * 2f64.ln() + 2.5;
        assert!((moment_zeta(&s, 2.0).unwrap() - expect).abs() < 1e-12);
        let b1 = TaperedParetoSpec::new(2.0, 1.0).unwrap();
        assert!((moment_zeta(&b1, 1.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((centered_abs_moment(&s, 2.0).unwrap() - (expect - 1.75 * 1.75)).abs() < 1e-11);
        assert!((centered_abs_moment(&b1, 2.0).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = TaperedParetoSpec::new(1.5, 10.0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(s.sample(&mut r1), s.sample(&mut r2));
        }
    }

    #[test]
    fn resolved_gaussian_ratio() {
        let g = InnovationModel::Gaussian.resolve(10).unwrap();
        assert!((g.moment_ratio(1.0).unwrap() - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn standardized_laws_have_unit_variance() {
        for base in [
            BaseDistribution::Uniform,
            BaseDistribution::Exponential,
            BaseDistribution::Rademacher,
            BaseDistribution::Laplace,
        ] {
            let inn = InnovationModel::Standardized { base }.resolve(1).unwrap();
            assert!((inn.abs_moment(2.0).unwrap() - 1.0).abs() < 1e-10, "{base:?}");
        }
    }
}
