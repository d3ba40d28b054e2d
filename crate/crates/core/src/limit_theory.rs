//! Limit variance functions `W^{(j)}`, Hurst exponents, normalizers
//! `A_n^{(j)}` and the constants `C₁ … C₂₃` they are assembled from.
//!
//! Throughout, `z = c / t`. The integrands below are the squared inner
//! integrals in closed form, e.g. `∫_0^1 (x + y)^{-β} dx =
//! ((y + 1)^{1-β} - y^{1-β}) / (1 - β)`; only the outer integral is done
//! numerically.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::filters::{CaseId, Dependence, FilterSpec};
use crate::numerics::special::pow_diff;
use crate::numerics::{integrate, integrate_with_breaks, QuadOptions};

fn opts() -> QuadOptions {
    QuadOptions::with_tol(1e-15, 1e-12)
}

// C₁ is integrated numerically on [0, TAIL_START]; the rest is a series.
const TAIL_START: f64 = 64.0;
const TAIL_TERMS: usize = 10;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.5 && beta < 1.5 && beta != 1.0 {
        Ok(())
    } else {
        domain(format!("constant requires 1/2 < beta < 3/2, beta != 1; got {beta}"))
    }
}

fn check_beta_above_one(beta: f64) -> Result<()> {
    if beta > 1.0 && beta < 1.5 {
        Ok(())
    } else {
        domain(format!("constant requires 1 < beta < 3/2; got {beta}"))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {x}"))
    }
}

/// `((y + 1)^{1-β} - y^{1-β}) / (1 - β)`.
fn unit_increment(y: f64, beta: f64) -> f64 {
    let a = 1.0 - beta;
    if y <= 0.0 {
        1.0 / a
    } else if y < 1.0 {
        ((y + 1.0).powf(a) - y.powf(a)) / a
    } else {
        pow_diff(y, 1.0, a) / a
    }
}

/// `(z^{1-β} - y^{1-β}) / (1 - β)` for `0 < y ≤ z`.
fn gap_to(z: f64, y: f64, beta: f64) -> f64 {
    let a = 1.0 - beta;
    if y < 0.5 * z {
        (z.powf(a) - y.powf(a)) / a
    } else {
        pow_diff(y, z - y, a) / a
    }
}

/// `∫_a^b f`, on a logarithmic scale when the range spans many octaves.
fn integrate_positive_range<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    if a > 0.0 && b > 4.0 * a {
        Ok(integrate(
            |s: f64| {
                let y = s.exp();
                f(y) * y
            },
            a.ln(),
            b.ln(),
            opts(),
        )?
        .value)
    } else {
        Ok(integrate(f, a, b, opts())?.value)
    }
}

/// `∫_0^b [((y+1)^{1-β} - y^{1-β})/(1-β)]² dy` for finite `b`.
fn unit_increment_integral(b: f64, beta: f64) -> Result<f64> {
    let f = |y: f64| unit_increment(y, beta).powi(2);
    if b <= 1.0 {
        return Ok(integrate(f, 0.0, b.max(0.0), opts())?.value);
    }
    Ok(integrate(f, 0.0, 1.0, opts())?.value + integrate_positive_range(f, 1.0, b)?)
}

/// `∫_Y^∞` of the same integrand from its expansion
/// `y^{-2β} Σ_k f_k y^{-k}`.
fn unit_increment_tail(y0: f64, beta: f64) -> f64 {
    let a = 1.0 - beta;
    // e_k = binom(a, k+1) / a
    let mut e = [0.0; TAIL_TERMS];
    let mut binom = a;
    for (k, ek) in e.iter_mut().enumerate() {
        *ek = binom / a;
        binom *= (a - (k + 1) as f64) / (k + 2) as f64;
    }
    let mut total = 0.0;
    for k in 0..TAIL_TERMS {
        let fk: f64 = (0..=k).map(|i| e[i] * e[k - i]).sum();
        let p = 2.0 * beta + k as f64 - 1.0;
        total += fk * y0.powf(-p) / p;
    }
    total
}

/// `C₁(β) = ∫_0^∞ [((y+1)^{1-β} - y^{1-β})/(1-β)]² dy`.
pub fn c1(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(unit_increment_integral(TAIL_START, beta)? + unit_increment_tail(TAIL_START, beta))
}

/// `C₂(β) = 1/((1-β)²(3-2β)) + C₁(β)`.
pub fn c2(beta: f64) -> Result<f64> {
    Ok(c6(beta)? + c1(beta)?)
}

/// `C₃(β) = C₁₅(β) + C₁(β)`.
pub fn c3(beta: f64) -> Result<f64> {
    Ok(c15(beta)? + c1(beta)?)
}

/// `C₄(z, β) = ∫_0^{z-1} [((y+1)^{1-β} - y^{1-β})/(1-β)]² dy`, `z ≥ 1`.
pub fn c4(z: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(z >= 1.0) {
        return domain(format!("C4 requires z >= 1, got {z}"));
    }
    unit_increment_integral(z - 1.0, beta)
}

/// `C₅(z, β) = ∫_{z-1}^{z} [(z^{1-β} - y^{1-β})/(1-β)]² dy`, `z ≥ 1`.
pub fn c5(z: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(z >= 1.0) {
        return domain(format!("C5 requires z >= 1, got {z}"));
    }
    Ok(integrate(|y| gap_to(z, y, beta).powi(2), z - 1.0, z, opts())?.value)
}

/// `C₆(β) = ∫_0^1 (∫_0^{1-y} x^{-β} dx)² dy = 1/((1-β)²(3-2β))`.
pub fn c6(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(1.0 / ((1.0 - beta).powi(2) * (3.0 - 2.0 * beta)))
}

/// `C₆` by quadrature of `((1-y)^{1-β}/(1-β))²` over `[0, 1]`.
pub fn c6_quadrature(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let a = 1.0 - beta;
    // in u = 1 - y, so nodes near the singular end stay representable
    Ok(integrate(|u: f64| (u.powf(a) / a).powi(2), 0.0, 1.0, opts())?.value)
}

/// `C₇ = C₄ + C₅ + C₆`, `z ≥ 1`.
pub fn c7(z: f64, beta: f64) -> Result<f64> {
    Ok(c4(z, beta)? + c5(z, beta)? + c6(beta)?)
}

fn check_small_z(name: &str, z: f64) -> Result<()> {
    if z > 0.0 && z <= 1.0 {
        Ok(())
    } else {
        domain(format!("{name} requires 0 < z <= 1, got {z}"))
    }
}

/// `C₈(z, β) = (1 - z) z^{2(1-β)} / (1-β)²`, `z ≤ 1`.
pub fn c8(z: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_small_z("C8", z)?;
    Ok((1.0 - z) * z.powf(2.0 * (1.0 - beta)) / (1.0 - beta).powi(2))
}

/// `C₉(z, β) = ∫_{1-z}^{1} ((1-y)^{1-β}/(1-β))² dy`, `z ≤ 1`.
pub fn c9(z: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_small_z("C9", z)?;
    let a = 1.0 - beta;
    Ok(integrate(|u: f64| (u.powf(a) / a).powi(2), 0.0, z, opts())?.value)
}

/// `C₁₀(z, β) = ∫_0^{z} [(z^{1-β} - y^{1-β})/(1-β)]² dy`, `z ≤ 1`.
pub fn c10(z: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_small_z("C10", z)?;
    Ok(integrate(|y| gap_to(z, y, beta).powi(2), 0.0, z, opts())?.value)
}

/// `C₁₁ = C₈ + C₉ + C₁₀`, `z ≤ 1`.
pub fn c11(z: f64, beta: f64) -> Result<f64> {
    Ok(c8(z, beta)? + c9(z, beta)? + c10(z, beta)?)
}

/// `C₁₂(t) = C₇` for `t ≤ c`, `C₁₁` for `t > c`.
pub fn c12(t: f64, beta: f64, c: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("c", c)?;
    let z = c / t;
    if t <= c {
        c7(z, beta)
    } else {
        c11(z, beta)
    }
}

/// `C₁₃(t) = C₁₂(t) / C₁₂(1)`.
pub fn c13(t: f64, beta: f64, c: f64) -> Result<f64> {
    if t == 1.0 {
        check_beta(beta)?;
        check_positive("c", c)?;
        return Ok(1.0);
    }
    Ok(c12(t, beta, c)? / c12(1.0, beta, c)?)
}

/// `C₁₄ = C₄ + C₅ + C₁₅`, `z ≥ 1`.
pub fn c14(z: f64, beta: f64) -> Result<f64> {
    Ok(c4(z, beta)? + c5(z, beta)? + c15(beta)?)
}

/// `C₁₅(β) = ∫_0^1 (∫_{1-v}^∞ u^{-β} du)² dv = 1/((β-1)²(3-2β))`.
pub fn c15(beta: f64) -> Result<f64> {
    check_beta_above_one(beta)?;
    Ok(1.0 / ((beta - 1.0).powi(2) * (3.0 - 2.0 * beta)))
}

/// `C₁₅` by quadrature of `((1-v)^{1-β}/(β-1))²` over `[0, 1]`.
pub fn c15_quadrature(beta: f64) -> Result<f64> {
    check_beta_above_one(beta)?;
    let a = 1.0 - beta;
    Ok(integrate(|u: f64| (u.powf(a) / (beta - 1.0)).powi(2), 0.0, 1.0, opts())?.value)
}

/// `C₁₆ = C₁₀ + C₁₇ + C₁₈`, `z ≤ 1`.
pub fn c16(z: f64, beta: f64) -> Result<f64> {
    Ok(c10(z, beta)? + c17(z, beta)? + c18(z, beta)?)
}

/// `C₁₇(z, β) = ∫_{1-z}^{1} ((1-y)^{1-β}/(β-1))² dy`, `z ≤ 1`.
pub fn c17(z: f64, beta: f64) -> Result<f64> {
    check_beta_above_one(beta)?;
    check_small_z("C17", z)?;
    let a = 1.0 - beta;
    // in u = 1 - y: the integrand is singular at u = 0
    Ok(integrate(|u: f64| (u.powf(a) / (beta - 1.0)).powi(2), 0.0, z, opts())?.value)
}

/// `C₁₈(z, β) = (1 - z) z^{2(1-β)} / (β-1)²`, `z ≤ 1`.
pub fn c18(z: f64, beta: f64) -> Result<f64> {
    check_beta_above_one(beta)?;
    check_small_z("C18", z)?;
    Ok((1.0 - z) * z.powf(2.0 * (1.0 - beta)) / (beta - 1.0).powi(2))
}

/// `C₁₉(t) = C₁₄` for `t ≤ c`, `C₁₆` for `t > c`.
pub fn c19(t: f64, beta: f64, c: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("c", c)?;
    let z = c / t;
    if t <= c {
        c14(z, beta)
    } else {
        c16(z, beta)
    }
}

/// `C₂₀(t) = C₁₉(t) / C₁₉(1)`.
pub fn c20(t: f64, beta: f64, c: f64) -> Result<f64> {
    if t == 1.0 {
        check_beta_above_one(beta)?;
        check_positive("c", c)?;
        return Ok(1.0);
    }
    Ok(c19(t, beta, c)? / c19(1.0, beta, c)?)
}

/// `C₂₁(c) = c² - c³/3` for `c ≤ 1`, `c - 1/3` for `c > 1`.
pub fn c21(c: f64) -> Result<f64> {
    check_positive("c", c)?;
    Ok(if c <= 1.0 {
        c * c - c * c * c / 3.0
    } else {
        c - 1.0 / 3.0
    })
}

/// `C₂₂(t, c) = c (1 - t/(3c)) / C₂₁(c)`, `t ≤ c`.
pub fn c22(t: f64, c: f64) -> Result<f64> {
    check_positive("t", t)?;
    if t > c {
        return domain(format!("C22 requires t <= c, got t = {t}, c = {c}"));
    }
    Ok(c * (1.0 - t / (3.0 * c)) / c21(c)?)
}

/// `C₂₃(t, c) = c² (1 - c/(3t)) / C₂₁(c)`, `t > c`.
pub fn c23(t: f64, c: f64) -> Result<f64> {
    check_positive("t", t)?;
    if t <= c {
        return domain(format!("C23 requires t > c, got t = {t}, c = {c}"));
    }
    Ok(c * c * (1.0 - c / (3.0 * t)) / c21(c)?)
}

/// Constant `C_id` at `(t, β, c)`; constants that depend on `z` use
/// `z = c / t`, and those without `t`, `β` or `c` ignore them.
pub fn limit_constant(id: u8, t: f64, beta: f64, c: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("c", c)?;
    let z = c / t;
    match id {
        1 => c1(beta),
        2 => c2(beta),
        3 => c3(beta),
        4 => c4(z, beta),
        5 => c5(z, beta),
        6 => c6(beta),
        7 => c7(z, beta),
        8 => c8(z, beta),
        9 => c9(z, beta),
        10 => c10(z, beta),
        11 => c11(z, beta),
        12 => c12(t, beta, c),
        13 => c13(t, beta, c),
        14 => c14(z, beta),
        15 => c15(beta),
        16 => c16(z, beta),
        17 => c17(z, beta),
        18 => c18(z, beta),
        19 => c19(t, beta, c),
        20 => c20(t, beta, c),
        21 => c21(c),
        22 => c22(t, c),
        23 => c23(t, c),
        _ => domain(format!("constant id must be in 1..=23, got {id}")),
    }
}

/// Hurst exponent of the limit process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hurst {
    Exponent(f64),
    /// `W` scales like `t²` below `c` and like `t` above (case 12).
    Piecewise,
}

impl Hurst {
    pub fn value(self) -> Option<f64> {
        match self {
            Hurst::Exponent(h) => Some(h),
            Hurst::Piecewise => None,
        }
    }
}

fn check_case_beta(case: CaseId, beta: f64) -> Result<()> {
    let ok = match case.dependence() {
        Dependence::Lrd => beta > 0.5 && beta < 1.0,
        Dependence::Srd => beta > 1.0 && beta.is_finite(),
        Dependence::Nd => beta > 1.0 && beta < 1.5,
        Dependence::Flat => beta == 0.0,
    };
    if ok {
        Ok(())
    } else {
        config(format!(
            "beta = {beta} is inconsistent with case {case} ({})",
            case.dependence()
        ))
    }
}

pub fn hurst(case: CaseId, beta: f64) -> Result<Hurst> {
    check_case_beta(case, beta)?;
    Ok(match case.j() {
        1 | 2 | 3 | 5 | 8 | 10 => Hurst::Exponent(0.5),
        4 | 6 | 7 | 9 => Hurst::Exponent(1.5 - beta),
        11 => Hurst::Exponent(1.0),
        _ => Hurst::Piecewise,
    })
}

/// `A_n²` for case `j`. `filter_sum` (`Σ a_i`) is required for
/// `j ∈ {2, 5, 8}`. Constants that need quadrature are evaluated here; use
/// [`LimitLaw::normalizer_sq`] to reuse them across `n`.
pub fn normalizer_sq(case: CaseId, beta: f64, gamma1: f64, c: f64, filter_sum: Option<f64>, n: u64) -> Result<f64> {
    LimitLaw::new(case, beta, gamma1, c)?.normalizer_sq(n, filter_sum)
}

/// The limit law of the normalized partial-sum process for one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub case: CaseId,
    pub beta: f64,
    pub gamma1: f64,
    pub c: f64,
    // C₂, C₃, C₁₂(1), C₁₉(1) or C₂₁(c), whichever the case needs
    scale: f64,
}

impl LimitLaw {
    pub fn new(case: CaseId, beta: f64, gamma1: f64, c: f64) -> Result<LimitLaw> {
        FilterSpec::for_case(case, beta, gamma1, c)?;
        let scale = match case.j() {
            4 => c2(beta)?,
            6 => c3(beta)?,
            7 => c12(1.0, beta, c)?,
            9 => c19(1.0, beta, c)?,
            12 => c21(c)?,
            _ => 1.0,
        };
        Ok(LimitLaw {
            case,
            beta,
            gamma1,
            c,
            scale,
        })
    }

    pub fn for_spec(spec: &FilterSpec) -> Result<LimitLaw> {
        LimitLaw::new(spec.case_id(), spec.beta, spec.gamma1, spec.c)
    }

    pub fn hurst(&self) -> Hurst {
        hurst(self.case, self.beta).expect("validated")
    }

    /// `W^{(j)}(t)`; `W(0) = 0`.
    pub fn w(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        check_positive("t", t)?;
        let (b, c) = (self.beta, self.c);
        Ok(match self.case.j() {
            1 | 2 | 3 | 5 | 8 | 10 => t,
            4 | 6 => t.powf(3.0 - 2.0 * b),
            7 => {
                if t == 1.0 {
                    1.0
                } else {
                    t.powf(3.0 - 2.0 * b) * c12(t, b, c)? / self.scale
                }
            }
            9 => {
                if t == 1.0 {
                    1.0
                } else {
                    t.powf(3.0 - 2.0 * b) * c19(t, b, c)? / self.scale
                }
            }
            11 => t * t,
            _ => {
                if t <= c {
                    t * t * c22(t, c)?
                } else {
                    t * c23(t, c)?
                }
            }
        })
    }

    /// `½ (W(s) + W(t) - W(|t - s|))`; exactly `W(t)` at `s = t`.
    pub fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        if s == t {
            return self.w(t);
        }
        Ok(0.5 * (self.w(s)? + self.w(t)? - self.w((t - s).abs())?))
    }

    /// `A_n²`.
    pub fn normalizer_sq(&self, n: u64, filter_sum: Option<f64>) -> Result<f64> {
        if n == 0 {
            return domain("n must be positive");
        }
        let nf = n as f64;
        let (b, g1) = (self.beta, self.gamma1);
        Ok(match self.case.j() {
            1 | 3 => nf.powf(1.0 + 2.0 * g1 * (1.0 - b)) / (1.0 - b).powi(2),
            2 | 5 | 8 => {
                let s = filter_sum.ok_or_else(|| {
                    Error::Config(format!("case {} needs the filter sum for its normalizer", self.case))
                })?;
                if s == 0.0 {
                    return Err(Error::Degenerate("filter sum is zero".into()));
                }
                s * s * nf
            }
            4 | 6 | 7 | 9 => self.scale * nf.powf(3.0 - 2.0 * b),
            10 => nf.powf(2.0 * g1 + 1.0),
            11 => nf.powf(2.0 + g1),
            _ => self.scale * nf.powi(3),
        })
    }
}

/// `W^{(j)}(t)` for one configuration.
pub fn w_function(case: CaseId, beta: f64, gamma1: f64, c: f64, t: f64) -> Result<f64> {
    LimitLaw::new(case, beta, gamma1, c)?.w(t)
}

/// `I(z) = ∫_0^{z-1} (y(1+y))^{1-β} dy`: the power series for `z < 2`,
/// quadrature otherwise.
pub fn i_series(z: f64, beta: f64) -> Result<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return domain(format!("I(z) requires z > 1, got {z}"));
    }
    if !(beta < 2.0) {
        return domain(format!("I(z) requires beta < 2, got {beta}"));
    }
    if z >= 2.0 {
        return i_quadrature(z, beta);
    }
    let x = z - 1.0;
    // r_k = (β-1)_k (-x)^k / k!
    let mut r = 1.0;
    let mut sum = 1.0 / (2.0 - beta);
    for k in 0..5_000_000u32 {
        let kf = k as f64;
        r *= (beta - 1.0 + kf) / (kf + 1.0) * (-x);
        let term = r / (2.0 - beta + kf + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || r == 0.0 {
            return Ok(x.powf(2.0 - beta) * sum);
        }
    }
    Err(Error::Numerical(format!("I(z) series did not converge at z = {z}")))
}

/// `I(z)` by adaptive quadrature.
pub fn i_quadrature(z: f64, beta: f64) -> Result<f64> {
    if !(z > 1.0) {
        return domain(format!("I(z) requires z > 1, got {z}"));
    }
    let f = |y: f64| (y * (1.0 + y)).powf(1.0 - beta);
    let x = z - 1.0;
    let v = if x > 1.0 {
        integrate(f, 0.0, 1.0, opts())?.value + integrate_positive_range(f, 1.0, x)?
    } else {
        integrate_with_breaks(f, &[0.0, x], opts())?.value
    };
    Ok(v)
}

/// Local log-log slope `ln(W(f t₀)/W(t₀)) / ln f`.
pub fn scaling_probe<W: Fn(f64) -> Result<f64>>(w: W, t0: f64, factor: f64) -> Result<f64> {
    check_positive("t0", t0)?;
    if !(factor > 1.0) {
        return domain(format!("factor must exceed 1, got {factor}"));
    }
    let (a, b) = (w(t0)?, w(t0 * factor)?);
    if !(a > 0.0 && b > 0.0) {
        return domain("W must be positive at both probe points");
    }
    Ok((b / a).ln() / factor.ln())
}

/// `3 (z-1)^{1-2β} / (2β-1)`, the bound on `|C₄(z) - C₁|`.
pub fn c4_tail_bound(z: f64, beta: f64) -> f64 {
    3.0 * (z - 1.0).powf(1.0 - 2.0 * beta) / (2.0 * beta - 1.0)
}

/// `|C₄(z, β) - C₁(β)|` along `z_grid`.
pub fn c4_limit_check(beta: f64, z_grid: &[f64]) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("z grid must be increasing");
    }
    if z_grid.iter().any(|&z| !(z > 1.0)) {
        return domain("z grid must lie above 1");
    }
    let limit = c1(beta)?;
    z_grid.iter().map(|&z| Ok((c4(z, beta)? - limit).abs())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(j: u8) -> CaseId {
        CaseId::new(j).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert!((c6(0.75).unwrap() - 32.0 / 3.0).abs() < 1e-12);
        assert!((c21(0.5).unwrap() - (0.25 - 0.125 / 3.0)).abs() < 1e-15);
        assert_eq!(c13(1.0, 0.75, 0.7).unwrap(), 1.0);
        assert_eq!(c20(1.0, 1.25, 0.7).unwrap(), 1.0);
        assert!(limit_constant(24, 1.0, 0.75, 1.0).is_err());
        assert!(c15(0.75).is_err());
    }

    #[test]
    fn c1_tail_series_matches_quadrature() {
        for &b in &[0.6, 0.75, 0.9, 1.2, 1.4] {
            let split = unit_increment_integral(TAIL_START, b).unwrap() + unit_increment_tail(TAIL_START, b);
            let other = unit_increment_integral(4096.0, b).unwrap() + unit_increment_tail(4096.0, b);
            assert!((split - other).abs() < 1e-10 * split, "beta={b}");
        }
    }

    #[test]
    fn hurst_examples() {
        assert_eq!(hurst(case(4), 0.75).unwrap(), Hurst::Exponent(0.75));
        assert_eq!(hurst(case(2), 3.0).unwrap(), Hurst::Exponent(0.5));
        assert_eq!(hurst(case(6), 1.25).unwrap(), Hurst::Exponent(0.25));
        assert_eq!(hurst(case(12), 0.0).unwrap(), Hurst::Piecewise);
        assert!(hurst(case(4), 1.25).is_err());
    }

    #[test]
    fn w_examples() {
        let l12 = LimitLaw::new(case(12), 0.0, 1.0, 0.5).unwrap();
        assert!((l12.w(0.5).unwrap() - 0.4).abs() < 1e-14);
        // the t > c branch meets the t <= c branch at t = c
        assert!((0.5 * c23(0.5 + 1e-12, 0.5).unwrap() - 0.4).abs() < 1e-10);
        assert!((l12.w(1.0).unwrap() - 1.0).abs() < 1e-14);
        let l4 = LimitLaw::new(case(4), 0.75, 1.5, 1.0).unwrap();
        assert!((l4.w(4.0).unwrap() - 8.0).abs() < 1e-14);
        let l7 = LimitLaw::new(case(7), 0.75, 1.0, 1.0).unwrap();
        assert_eq!(l7.w(1.0).unwrap(), 1.0);
    }

    #[test]
    fn normalizer_examples() {
        let a = normalizer_sq(case(1), 0.75, 0.5, 1.0, None, 10_000).unwrap();
        assert!((a / 1.6e6 - 1.0).abs() < 1e-12);
        let a = normalizer_sq(case(10), 0.0, 0.5, 1.0, None, 100).unwrap();
        assert!((a - 1e4).abs() < 1e-9);
        let a = normalizer_sq(case(2), 2.0, 0.5, 1.0, Some(3.0), 50).unwrap();
        assert_eq!(a, 450.0);
        assert!(normalizer_sq(case(2), 2.0, 0.5, 1.0, None, 50).is_err());
    }

    #[test]
    fn kernel_examples() {
        let l2 = LimitLaw::new(case(2), 2.0, 0.5, 1.0).unwrap();
        assert!((l2.covariance(0.3, 0.8).unwrap() - 0.3).abs() < 1e-15);
        let l11 = LimitLaw::new(case(11), 0.0, 1.5, 1.0).unwrap();
        assert!((l11.covariance(0.3, 0.8).unwrap() - 0.24).abs() < 1e-15);
        assert_eq!(l11.covariance(0.6, 0.6).unwrap(), l11.w(0.6).unwrap());
    }

    #[test]
    fn i_series_examples() {
        assert!((i_series(1.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let s = i_series(1.5, 0.75).unwrap();
        let q = i_quadrature(1.5, 0.75).unwrap();
        assert!((s - q).abs() < 1e-12);
        assert!(i_series(1.0 + 1e-12, 0.75).unwrap() < 1e-8);
    }

    #[test]
    fn probe_examples() {
        let h = scaling_probe(|t| Ok(t.powf(1.5)), 0.3, 2.0).unwrap();
        assert!((h - 1.5).abs() < 1e-14);
        assert!(scaling_probe(|_| Ok(0.0), 1.0, 2.0).is_err());
    }
}
