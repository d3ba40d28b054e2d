//! Exact representation of partial sums, `S_n(t) = Σ_j d_{n,j,t} ξ_j`.
//!
//! With `m = ⌊nt⌋` and prefix sums `P(K) = Σ_{i=0}^{min(K,λ)} ã_i`:
//!
//! * for `1 ≤ j ≤ m`, `d_j = Σ_{k=j}^{m} ã_{k-j} = P(m - j)`;
//! * for `j = -u ≤ 0`, `d_j = Σ_{k=1}^{m} ã_{k+u} = P(u + m) - P(u)`, which
//!   vanishes for `u ≥ λ`.
//!
//! Everything is therefore `O(m + λ)` from one prefix table. When `λ` is far
//! larger than `m` (weak tapering, `λ = n^{γ₁}` with `γ₁ > 1`) the
//! pre-sample coefficients beyond a few multiples of `m` are smooth in `u`
//! and follow from the asymptotic expansion of the power sum, so sums over
//! that range are done by Euler–Maclaurin summation instead of term by term.

use crate::error::{config, domain, Error, Result};
use crate::filters::{CaseId, Dependence, Filter};
use crate::numerics::special::PowerSumExpansion;
use crate::numerics::{integrate, KahanSum, QuadOptions};

// λ above which the far field is summed analytically
const HYBRID_MIN_LAMBDA: u64 = 1 << 24;
const HYBRID_MIN_NEAR: u64 = 1 << 20;
// far-field pieces shorter than this are summed term by term
const DIRECT_PIECE: u64 = 1 << 16;

/// `m = ⌊nt⌋`, snapping values within `1e-9` relative of an integer.
pub fn window_len(n: u64, t: f64) -> Result<u64> {
    if n == 0 {
        return domain("n must be positive");
    }
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("t must be positive and finite, got {t}"));
    }
    let x = n as f64 * t;
    let r = x.round();
    let m = if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.floor()
    };
    Ok(m as u64)
}

fn nonempty_window(n: u64, t: f64) -> Result<u64> {
    let m = window_len(n, t)?;
    if m == 0 {
        return Err(Error::EmptyWindow { n, t });
    }
    Ok(m)
}

/// Pre-sample coefficients `w_u`, `u ≥ start`, from the power-sum expansion.
#[derive(Debug, Clone, Copy)]
struct FarField {
    expansion: PowerSumExpansion,
    lambda: u64,
    start: u64,
}

impl FarField {
    /// `w_u(m)` on the window branch (`u + m ≤ λ`) or the clipped branch.
    #[inline]
    fn w(&self, u: f64, m: u64, clipped: bool) -> f64 {
        if clipped {
            self.expansion.diff(u, self.lambda as f64 - u)
        } else {
            self.expansion.diff(u, m as f64)
        }
    }

    /// `Σ_{u=start}^{λ-1} g(w_u(m_1), …, w_u(m_k))`.
    fn reduce<G: Fn(&[f64]) -> f64>(&self, ms: &[u64], g: G) -> Result<f64> {
        let lambda = self.lambda;
        // piece boundaries: u = λ - m_i + 1 is the first clipped index for m_i
        let mut cuts: Vec<u64> = ms
            .iter()
            .map(|&m| (lambda + 1).saturating_sub(m).max(self.start))
            .collect();
        cuts.push(self.start);
        cuts.push(lambda);
        cuts.sort_unstable();
        cuts.dedup();
        let mut total = KahanSum::new();
        for piece in cuts.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            if b <= a {
                continue;
            }
            let clipped: Vec<bool> = ms.iter().map(|&m| a + m > lambda).collect();
            let f = |u: f64| {
                let ws: Vec<f64> = ms.iter().zip(&clipped).map(|(&m, &c)| self.w(u, m, c)).collect();
                g(&ws)
            };
            total.add(smooth_sum(&f, a, b - 1)?);
        }
        Ok(total.sum())
    }
}

/// `Σ_{u=a}^{b} g(u)` for a smooth `g`: direct for short ranges, otherwise
/// Euler–Maclaurin with the first derivative correction.
fn smooth_sum(g: &dyn Fn(f64) -> f64, a: u64, b: u64) -> Result<f64> {
    if b < a {
        return Ok(0.0);
    }
    let len = b - a + 1;
    if len <= DIRECT_PIECE {
        return Ok((a..=b).map(|u| g(u as f64)).collect::<KahanSum>().sum());
    }
    let (af, bf) = (a as f64, b as f64);
    let opts = QuadOptions::with_tol(0.0, 1e-13);
    let integral = if bf > 4.0 * af {
        integrate(
            |s: f64| {
                let u = s.exp();
                g(u) * u
            },
            af.ln(),
            bf.ln(),
            opts,
        )?
        .value
    } else {
        integrate(g, af, bf, opts)?.value
    };
    // one-sided second-order differences stay inside the piece
    let h = (len as f64 / 64.0).min(1e-3 * af).max(1.0);
    let da = (-3.0 * g(af) + 4.0 * g(af + h) - g(af + 2.0 * h)) / (2.0 * h);
    let db = (3.0 * g(bf) - 4.0 * g(bf - h) + g(bf - 2.0 * h)) / (2.0 * h);
    Ok(integral + 0.5 * (g(af) + g(bf)) + (db - da) / 12.0)
}

/// The coefficients `d_{n,j,t}`, `1 - λ ≤ j ≤ m`.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    n: u64,
    t: f64,
    m: u64,
    lambda: u64,
    // d_j for j = 1..=m, stored at j - 1
    post: Vec<f64>,
    // d_{-u} for u = 0..pre.len()
    pre: Vec<f64>,
    far: Option<FarField>,
    v1: f64,
    v2: f64,
}

/// Profile from an explicit filter array `ã_0..ã_λ`.
pub fn d_coefficients(filter: &[f64], n: u64, t: f64) -> Result<CoefficientProfile> {
    if filter.is_empty() {
        return domain("filter must contain at least a_0");
    }
    let m = nonempty_window(n, t)?;
    let lambda = filter.len() as u64 - 1;
    let mut acc = KahanSum::new();
    let table: Vec<f64> = filter
        .iter()
        .map(|&a| {
            acc.add(a);
            acc.sum()
        })
        .collect();
    Ok(assemble(n, t, m, lambda, &table, lambda as usize, None))
}

/// Profile for the power-law or flat filter at its own sample size.
///
/// Dense when `λ ≤ 2^24` or `λ` is not much larger than `m`; otherwise the
/// pre-sample coefficients beyond `u = max(4m, 2^20)` are kept analytic.
pub fn profile_for(filter: &Filter, t: f64) -> Result<CoefficientProfile> {
    let m = nonempty_window(filter.n(), t)?;
    profile_for_window(filter, m)
}

/// Profile for an explicit window length `m ≥ 1`; `t` is reported as `m/n`.
pub fn profile_for_window(filter: &Filter, m: u64) -> Result<CoefficientProfile> {
    let n = filter.n();
    if m == 0 {
        return domain("window length must be positive");
    }
    let t = m as f64 / n as f64;
    let lambda = filter.lambda();
    match hybrid_start(filter, m) {
        Some(start) => {
            let (_, expansion) = filter.asymptotic_parts().expect("power-law filter");
            let table = filter.prefix_table((start + m) as usize);
            let far = FarField {
                expansion,
                lambda,
                start,
            };
            Ok(assemble(n, t, m, lambda, &table, start as usize, Some(far)))
        }
        None => {
            let len = lambda
                .checked_add(1)
                .filter(|&l| l <= (1u64 << 31))
                .ok_or(Error::Capacity {
                    requested: usize::try_from(lambda).unwrap_or(usize::MAX),
                    cap: 1 << 31,
                })?;
            let table = filter.prefix_table(len as usize);
            Ok(assemble(n, t, m, lambda, &table, lambda as usize, None))
        }
    }
}

fn hybrid_start(filter: &Filter, m: u64) -> Option<u64> {
    let lambda = filter.lambda();
    if filter.is_flat() || lambda <= HYBRID_MIN_LAMBDA {
        return None;
    }
    let start = (4 * m).max(HYBRID_MIN_NEAR);
    if lambda < 8 * m + 2 * HYBRID_MIN_NEAR {
        return None;
    }
    Some(start)
}

fn assemble(
    n: u64,
    t: f64,
    m: u64,
    lambda: u64,
    table: &[f64],
    near: usize,
    far: Option<FarField>,
) -> CoefficientProfile {
    let last = table.len() - 1;
    let p = |k: u64| table[(k as usize).min(last)];
    let post: Vec<f64> = (1..=m).map(|j| p(m - j)).collect();
    let pre: Vec<f64> = (0..near as u64).map(|u| p(u + m) - p(u)).collect();
    let v2 = post.iter().map(|d| d * d).collect::<KahanSum>().sum();
    let mut v1 = pre.iter().map(|d| d * d).collect::<KahanSum>();
    if let Some(f) = &far {
        let tail = f
            .reduce(&[m], |w| w[0] * w[0])
            .expect("far-field quadrature of a smooth power law");
        v1.add(tail);
    }
    CoefficientProfile {
        n,
        t,
        m,
        lambda,
        post,
        pre,
        far,
        v1: v1.sum(),
        v2,
    }
}

impl CoefficientProfile {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// Index range `(1 - λ, m)` of possibly nonzero coefficients.
    pub fn support(&self) -> (i64, i64) {
        (1 - self.lambda as i64, self.m as i64)
    }

    /// True when every coefficient is stored explicitly.
    pub fn is_dense(&self) -> bool {
        self.far.is_none()
    }

    /// `d_{n,j,t}` (zero outside the support).
    pub fn d(&self, j: i64) -> f64 {
        if j >= 1 {
            return self.post.get(j as usize - 1).copied().unwrap_or(0.0);
        }
        let u = (-j) as u64;
        if u >= self.lambda {
            return 0.0;
        }
        if let Some(&v) = self.pre.get(u as usize) {
            return v;
        }
        match &self.far {
            Some(f) => f.w(u as f64, self.m, u + self.m > self.lambda),
            None => 0.0,
        }
    }

    /// `d_j` for `j = 1..=m`.
    pub fn post_sample(&self) -> &[f64] {
        &self.post
    }

    /// `d_{-u}` for the explicitly stored `u = 0, 1, …`.
    pub fn pre_sample(&self) -> &[f64] {
        &self.pre
    }

    /// All coefficients ordered from `j = 1 - λ` to `j = m`; `None` for a
    /// profile with an analytic far field.
    pub fn dense_values(&self) -> Option<Vec<f64>> {
        if self.far.is_some() {
            return None;
        }
        let mut out: Vec<f64> = self.pre.iter().rev().copied().collect();
        out.extend_from_slice(&self.post);
        Some(out)
    }

    /// `Σ_j d_j²`.
    pub fn sum_sq(&self) -> f64 {
        let mut s = KahanSum::new();
        s.add(self.v1);
        s.add(self.v2);
        s.sum()
    }

    /// `Σ_j |d_j|^p`.
    pub fn power_sum(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return domain(format!("power must be positive, got {p}"));
        }
        let mut s: KahanSum = self
            .post
            .iter()
            .chain(self.pre.iter())
            .map(|d| d.abs().powf(p))
            .collect();
        if let Some(f) = &self.far {
            s.add(f.reduce(&[self.m], |w| w[0].abs().powf(p))?);
        }
        Ok(s.sum())
    }

    /// `(I₁, I₂)`: largest pre-sample and post-sample `|d_j|`.
    pub fn max_window_sums(&self) -> (f64, f64) {
        let mut i1 = self.pre.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if let Some(f) = &self.far {
            // w_u is nonincreasing beyond the stored range
            i1 = i1.max(f.w(f.start as f64, self.m, f.start + self.m > self.lambda).abs());
        }
        let i2 = self.post.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        (i1, i2)
    }

    pub fn max_abs(&self) -> f64 {
        let (a, b) = self.max_window_sums();
        a.max(b)
    }
}

/// `Var S_n(t) = σ² Σ_j d_j²`.
pub fn exact_variance(profile: &CoefficientProfile, sigma2: f64) -> f64 {
    sigma2 * profile.sum_sq()
}

/// `(V₁, V₂) = (Σ_{j≤0} d_j², Σ_{j>0} d_j²)`.
pub fn v1_v2(profile: &CoefficientProfile) -> (f64, f64) {
    (profile.v1, profile.v2)
}

/// `I₁ = max_{k≥0} |Σ_{i=1}^{m} ã_{i+k}|`, `I₂ = max_{0<k≤m} |Σ_{i=k}^{m} ã_{i-k}|`.
pub fn max_window_sums(filter: &[f64], n: u64, t: f64) -> Result<(f64, f64)> {
    Ok(d_coefficients(filter, n, t)?.max_window_sums())
}

/// `Σ_j |d_{n,j,t}|^{2+δ} / (Σ_j d_{n,j,1}²)^{(2+δ)/2} · ρ` with
/// `ρ = E|ξ|^{2+δ} / (Eξ²)^{(2+δ)/2}`.
pub fn lyapunov_fraction(
    profile_t: &CoefficientProfile,
    profile_1: &CoefficientProfile,
    delta: f64,
    moment_ratio: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    if profile_t.n != profile_1.n || profile_t.lambda != profile_1.lambda {
        return config("profiles must share n and the filter");
    }
    let denom = profile_1.sum_sq();
    if !(denom > 0.0) {
        return Err(Error::Degenerate("Σ d² vanishes at t = 1".into()));
    }
    if moment_ratio == 0.0 {
        return Ok(0.0);
    }
    let p = 2.0 + delta;
    Ok(profile_t.power_sum(p)? / denom.powf(0.5 * p) * moment_ratio)
}

/// `δ = 1` except for ND cases, where `δ = min(1, (3-2β)/(2(β-1)))`.
pub fn delta_for_case(case: CaseId, beta: f64) -> Result<f64> {
    let dep = case.dependence();
    let ok = match dep {
        Dependence::Lrd => beta > 0.5 && beta < 1.0,
        Dependence::Srd => beta > 1.0,
        Dependence::Nd => beta > 1.0 && beta < 1.5,
        Dependence::Flat => beta == 0.0,
    };
    if !ok {
        return config(format!("beta = {beta} is inconsistent with case {case} ({dep})"));
    }
    Ok(match dep {
        Dependence::Nd => (0.5 * (3.0 - 2.0 * beta) / (beta - 1.0)).min(1.0),
        _ => 1.0,
    })
}

/// Gram matrix `G_{il} = Σ_{u≥0} w_u(m_i) w_u(m_l)` of the pre-sample
/// weights, row-major `k × k`. `Σ_{u≥0} w_u(m_i) ξ_{-u}` is the part of
/// `S_{m_i}` driven by innovations with index `≤ 0`.
pub fn presample_gram(filter: &Filter, ms: &[u64]) -> Result<Vec<f64>> {
    let k = ms.len();
    let lambda = filter.lambda();
    let m_max = ms.iter().copied().max().unwrap_or(0);
    let (near, far) = match hybrid_start(filter, m_max) {
        Some(start) => {
            let (_, expansion) = filter.asymptotic_parts().expect("power-law filter");
            (
                start,
                Some(FarField {
                    expansion,
                    lambda,
                    start,
                }),
            )
        }
        None => (lambda, None),
    };
    let table = filter.prefix_table((near + m_max).min(lambda) as usize + 1);
    let last = table.len() - 1;
    let p = |k: u64| table[(k as usize).min(last)];
    let mut acc = vec![KahanSum::new(); k * k];
    let mut w = vec![0.0; k];
    for u in 0..near {
        let pu = p(u);
        for (wi, &m) in w.iter_mut().zip(ms) {
            *wi = p(u + m) - pu;
        }
        for i in 0..k {
            for l in 0..=i {
                acc[i * k + l].add(w[i] * w[l]);
            }
        }
    }
    let mut g: Vec<f64> = acc.iter().map(|s| s.sum()).collect();
    if let Some(f) = far {
        for i in 0..k {
            for l in 0..=i {
                g[i * k + l] += f.reduce(&[ms[i], ms[l]], |w| w[0] * w[1])?;
            }
        }
    }
    for i in 0..k {
        for l in 0..i {
            g[l * k + i] = g[i * k + l];
        }
    }
    Ok(g)
}
