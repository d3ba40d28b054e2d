//! Special functions: Riemann zeta, asymptotic power sums, the scaled upper
//! incomplete gamma function and a few Gaussian helpers.

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};

// B_{2j} / (2j)!, j = 1..7
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// Riemann zeta function for real `s ≥ 0`, `s ≠ 1`.
///
/// Direct summation of the first `N - 1` terms followed by the
/// Euler–Maclaurin tail (integral, half-term and seven Bernoulli
/// corrections). For `0 ≤ s < 1` the same formula is the analytic
/// continuation, so e.g. `ζ(0) = -1/2` and `ζ(0.75) ≈ -3.4429`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return domain(format!("zeta requires finite s >= 0, got {s}"));
    }
    if (s - 1.0).abs() < 1e-12 {
        return domain("zeta has a pole at s = 1");
    }
    const N: usize = 20;
    let nf = N as f64;
    let mut acc = super::KahanSum::new();
    for k in 1..N {
        acc.add((k as f64).powf(-s));
    }
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * nf.powf(-s));
    // rising factorial s (s+1) ... (s+2j-2)
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        acc.add(c * rising * power);
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        power /= nf * nf;
    }
    Ok(acc.sum())
}

/// `(x + h)^p - x^p` without cancellation for `h ≪ x`.
#[inline]
pub fn pow_diff(x: f64, h: f64, p: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    x.powf(p) * (p * (h / x).ln_1p()).exp_m1()
}

/// `(b^q - 1) / q`, continuous at `q = 0` where it equals `ln b`.
pub fn pow_minus_one_over(b: f64, q: f64) -> f64 {
    let lb = b.ln();
    let y = q * lb;
    if y.abs() < 1e-8 {
        lb * (1.0 + 0.5 * y + y * y / 6.0)
    } else {
        y.exp_m1() / q
    }
}

/// Large-argument expansion of the power sum `Σ_{k=1}^{K} k^{-s}`.
///
/// `Σ_{k=1}^{K} k^{-s} = ζ(s) + G(K) + O(K^{-s-7})` where `G` is
/// returned by [`PowerSumExpansion::value`]. Differences `G(x+h) - G(x)`
/// are evaluated termwise through [`pow_diff`], so they stay accurate even
/// when `h ≪ x`. Valid for any real `s ≠ 1`, including `s = 0`.
#[derive(Debug, Clone, Copy)]
pub struct PowerSumExpansion {
    s: f64,
    // (coefficient, exponent) pairs
    terms: [(f64, f64); 5],
}

impl PowerSumExpansion {
    pub fn new(s: f64) -> Self {
        debug_assert!((s - 1.0).abs() > 1e-12);
        let r3 = s * (s + 1.0) * (s + 2.0);
        let r5 = r3 * (s + 3.0) * (s + 4.0);
        PowerSumExpansion {
            s,
            terms: [
                (1.0 / (1.0 - s), 1.0 - s),
                (0.5, -s),
                (-s / 12.0, -s - 1.0),
                (r3 / 720.0, -s - 3.0),
                (-r5 / 30_240.0, -s - 5.0),
            ],
        }
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * x.powf(*p)).sum()
    }

    /// `G(x + h) - G(x)`, i.e. `Σ_{k=x+1}^{x+h} k^{-s}` for integer `x, h`.
    pub fn diff(&self, x: f64, h: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * pow_diff(x, h, *p)).sum()
    }
}

/// `e^x Γ(s, x)` for `s > 0`, `x > 0`, without forming `e^x` or `Γ(s, x)`.
///
/// Uses the Legendre continued fraction (modified Lentz) for `x ≥ s + 1`
/// and the lower-gamma series otherwise.
pub fn upper_gamma_scaled(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !(x > 0.0) {
        return domain(format!("upper_gamma_scaled needs s > 0, x > 0, got ({s}, {x})"));
    }
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    if x >= s + 1.0 {
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok((s * x.ln()).exp() * h);
            }
        }
        Err(crate::Error::Numerical(format!(
            "incomplete gamma continued fraction did not converge for ({s}, {x})"
        )))
    } else {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut a = s;
        for _ in 0..10_000 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                let lower_scaled = (s * x.ln()).exp() * sum;
                return Ok((x + ln_gamma(s)).exp() - lower_scaled);
            }
        }
        Err(crate::Error::Numerical(format!(
            "incomplete gamma series did not converge for ({s}, {x})"
        )))
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `E|N(0,1)|^p = 2^{p/2} Γ((p+1)/2) / √π`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    2f64.powf(0.5 * p) * gamma(0.5 * (p + 1.0)) / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_to_infinity, QuadOptions};

    #[test]
    fn zeta_known_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((riemann_zeta(2.0).unwrap() - pi2 / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4.0).unwrap() - pi2 * pi2 / 90.0).abs() < 1e-14);
        assert!((riemann_zeta(3.0).unwrap() - 1.202_056_903_159_594_3).abs() < 1e-14);
        assert!((riemann_zeta(0.0).unwrap() + 0.5).abs() < 1e-14);
        // mpmath: zeta(0.5) = -1.4603545088095868
        assert!((riemann_zeta(0.5).unwrap() + 1.460_354_508_809_586_8).abs() < 1e-12);
        // mpmath: zeta(1.25) = 4.595111825842944
        assert!((riemann_zeta(1.25).unwrap() - 4.595_111_825_842_944).abs() < 1e-12);
        assert!(riemann_zeta(1.0).is_err());
    }

    #[test]
    fn power_sum_expansion_matches_direct_sum() {
        for &s in &[0.0, 0.6, 0.75, 1.25, 2.0] {
            let e = PowerSumExpansion::new(s);
            let z = riemann_zeta(s).unwrap();
            let mut direct = crate::numerics::KahanSum::new();
            for k in 1..=5000u32 {
                direct.add((k as f64).powf(-s));
            }
            let approx = z + e.value(5000.0);
            assert!(
                (approx - direct.sum()).abs() < 1e-10 * direct.sum().abs().max(1.0),
                "s={s}"
            );
            // windowed differences
            let mut window = crate::numerics::KahanSum::new();
            for k in 3001..=5000u32 {
                window.add((k as f64).powf(-s));
            }
            let d = e.diff(3000.0, 2000.0);
            assert!((d - window.sum()).abs() < 1e-12 * window.sum().abs(), "s={s}");
        }
    }

    #[test]
    fn scaled_upper_gamma_matches_quadrature() {
        for &(s, x) in &[
            (2.0, 1.0),
            (3.0, 2.0),
            (1.5, 10.0),
            (4.0, 1.0),
            (2.5, 700.0),
            (3.0, 1e4),
        ] {
            let got = upper_gamma_scaled(s, x).unwrap();
            // e^x Γ(s,x) = ∫_0^∞ (x+y)^{s-1} e^{-y} dy
            let q = integrate_to_infinity(
                |y| (x + y).powf(s - 1.0) * (-y).exp(),
                0.0,
                10.0,
                QuadOptions::with_tol(0.0, 1e-13),
            )
            .unwrap();
            assert!(
                (got - q.value).abs() < 1e-11 * q.value,
                "({s},{x}): {got} vs {}",
                q.value
            );
        }
    }

    #[test]
    fn scaled_upper_gamma_asymptotic_regime() {
        // e^b Γ(r+1, b) ≈ b^r (1 + r/b + r(r-1)/b^2 + r(r-1)(r-2)/b^3)
        let (r, b) = (2.5f64, 5000.0f64);
        let approx = b.powf(r) * (1.0 + r / b + r * (r - 1.0) / (b * b) + r * (r - 1.0) * (r - 2.0) / b.powi(3));
        let got = upper_gamma_scaled(r + 1.0, b).unwrap();
        assert!((got / approx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_third_abs_moment() {
        let expect = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((gaussian_abs_moment(3.0) - expect).abs() < 1e-14);
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pow_diff_small_increment() {
        let x = 1e9f64;
        let d = pow_diff(x, 1.0, 0.25);
        let expect = 0.25 * x.powf(-0.75) * (1.0 - 0.375 / x);
        assert!((d / expect - 1.0).abs() < 1e-12);
    }
}
