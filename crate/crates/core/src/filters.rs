//! Truncated power-law filters `ã_i = a_i 1[0 ≤ i ≤ λ(n)]`, `a_i = i^{-β}`,
//! and the case table that pairs a truncation regime with a dependence class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::numerics::special::{riemann_zeta, PowerSumExpansion};
use crate::numerics::KahanSum;

/// Largest filter that [`build_filter`] will materialize.
pub const DEFAULT_MATERIALIZE_CAP: usize = 1 << 26;

// Below this index prefix sums are accumulated term by term.
const ASYMPTOTIC_START: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependence {
    /// Long-range dependence, `1/2 < β < 1`.
    Lrd,
    /// Short-range dependence, `β > 1`, `Σ a_i ≠ 0`.
    Srd,
    /// Negative dependence, `1 < β < 3/2`, `Σ a_i = 0`.
    Nd,
    /// All coefficients equal to one (`β = 0`).
    Flat,
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dependence::Lrd => "LRD",
            Dependence::Srd => "SRD",
            Dependence::Nd => "ND",
            Dependence::Flat => "flat",
        };
        f.write_str(s)
    }
}

/// Convention for the coefficient `a_0`, which the power law leaves free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A0Mode {
    /// `a_0 = 1`.
    One,
    /// `a_0 = -ζ(β)`. For `β > 1` this makes `Σ_{i≥0} a_i = 0`; for
    /// `β < 1` (analytic continuation of ζ) it removes the constant term
    /// from `Σ_{i=0}^{K} a_i = K^{1-β}/(1-β) + O(K^{-β})`.
    ZetaBalanced,
}

impl A0Mode {
    pub fn default_for(dependence: Dependence) -> A0Mode {
        match dependence {
            Dependence::Srd | Dependence::Flat => A0Mode::One,
            Dependence::Lrd | Dependence::Nd => A0Mode::ZetaBalanced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterTaper {
    /// `γ₁ < 1`: `λ(n)/n → 0`.
    Strong,
    /// `γ₁ > 1`: `λ(n)/n → ∞`.
    Weak,
    /// `γ₁ = 1`: `λ(n) = c n`.
    Moderate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnovationTaper {
    Hard,
    Soft,
    Intermediate,
}

/// `strong` iff `γ₁ < 1`, `moderate` iff `γ₁ = 1` exactly, `weak` otherwise.
pub fn classify_filter_taper(gamma1: f64) -> Result<FilterTaper> {
    if !(gamma1 > 0.0) || !gamma1.is_finite() {
        return domain(format!("gamma1 must be positive and finite, got {gamma1}"));
    }
    Ok(if gamma1 < 1.0 {
        FilterTaper::Strong
    } else if gamma1 == 1.0 {
        FilterTaper::Moderate
    } else {
        FilterTaper::Weak
    })
}

/// Innovation tapering with level `b_n = n^γ` for Pareto(α) tails:
/// hard iff `γ < 1/α`, soft iff `γ > 1/α`, intermediate iff `γ = 1/α`.
pub fn classify_innovation_taper(gamma: f64, alpha: f64) -> Result<InnovationTaper> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("gamma must be positive and finite, got {gamma}"));
    }
    let inv = 1.0 / alpha;
    Ok(if gamma == inv {
        InnovationTaper::Intermediate
    } else if gamma < inv {
        InnovationTaper::Hard
    } else {
        InnovationTaper::Soft
    })
}

/// Case index `j ∈ 1..=12`.
///
/// `j = 1, 2, 3` strong taper, `4, 5, 6` weak, `7, 8, 9` moderate, each
/// with dependence LRD, SRD, ND in that order; `10, 11, 12` are the flat
/// filter under strong, weak and moderate taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CaseId(u8);

impl CaseId {
    pub fn new(j: u8) -> Result<CaseId> {
        if (1..=12).contains(&j) {
            Ok(CaseId(j))
        } else {
            config(format!("case id must be in 1..=12, got {j}"))
        }
    }

    pub fn all() -> impl Iterator<Item = CaseId> {
        (1..=12).map(CaseId)
    }

    pub fn j(self) -> u8 {
        self.0
    }

    pub fn regime(self) -> FilterTaper {
        match self.0 {
            1..=3 | 10 => FilterTaper::Strong,
            4..=6 | 11 => FilterTaper::Weak,
            _ => FilterTaper::Moderate,
        }
    }

    pub fn dependence(self) -> Dependence {
        match self.0 {
            10..=12 => Dependence::Flat,
            j => match (j - 1) % 3 {
                0 => Dependence::Lrd,
                1 => Dependence::Srd,
                _ => Dependence::Nd,
            },
        }
    }

    pub fn from_parts(regime: FilterTaper, dependence: Dependence) -> CaseId {
        let r = match regime {
            FilterTaper::Strong => 0,
            FilterTaper::Weak => 1,
            FilterTaper::Moderate => 2,
        };
        match dependence {
            Dependence::Flat => CaseId(10 + r),
            Dependence::Lrd => CaseId(1 + 3 * r),
            Dependence::Srd => CaseId(2 + 3 * r),
            Dependence::Nd => CaseId(3 + 3 * r),
        }
    }
}

impl TryFrom<u8> for CaseId {
    type Error = Error;
    fn try_from(j: u8) -> Result<CaseId> {
        CaseId::new(j)
    }
}

impl From<CaseId> for u8 {
    fn from(c: CaseId) -> u8 {
        c.0
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j={}", self.0)
    }
}

/// Parameters of the filter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub beta: f64,
    pub dependence: Dependence,
    pub gamma1: f64,
    /// Scale of `λ(n) = c n`; only used when `γ₁ = 1`.
    pub c: f64,
    pub a0_mode: A0Mode,
}

impl FilterSpec {
    /// Builds and validates a spec with the default `a_0` convention.
    pub fn new(dependence: Dependence, beta: f64, gamma1: f64, c: f64) -> Result<FilterSpec> {
        let spec = FilterSpec {
            beta,
            dependence,
            gamma1,
            c,
            a0_mode: A0Mode::default_for(dependence),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec for case `j`, checking that `γ₁` matches the case's regime.
    pub fn for_case(case: CaseId, beta: f64, gamma1: f64, c: f64) -> Result<FilterSpec> {
        let spec = FilterSpec::new(case.dependence(), beta, gamma1, c)?;
        let regime = classify_filter_taper(gamma1)?;
        if regime != case.regime() {
            return config(format!(
                "case {case} needs {:?} tapering but gamma1 = {gamma1} gives {regime:?}",
                case.regime()
            ));
        }
        Ok(spec)
    }

    pub fn with_a0_mode(mut self, mode: A0Mode) -> Result<FilterSpec> {
        self.a0_mode = mode;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.beta;
        let ok = match self.dependence {
            Dependence::Lrd => b > 0.5 && b < 1.0,
            Dependence::Srd => b > 1.0 && b.is_finite(),
            Dependence::Nd => b > 1.0 && b < 1.5,
            Dependence::Flat => b == 0.0,
        };
        if !ok {
            let range = match self.dependence {
                Dependence::Lrd => "1/2 < beta < 1",
                Dependence::Srd => "beta > 1",
                Dependence::Nd => "1 < beta < 3/2",
                Dependence::Flat => "beta = 0",
            };
            return config(format!("{} filter requires {range}, got beta = {b}", self.dependence));
        }
        classify_filter_taper(self.gamma1)?;
        if !(self.c > 0.0) || !self.c.is_finite() {
            return config(format!("c must be positive and finite, got {}", self.c));
        }
        match (self.dependence, self.a0_mode) {
            (Dependence::Nd, A0Mode::One) => config("ND filter requires a0_mode = zeta-balanced"),
            (Dependence::Flat, A0Mode::ZetaBalanced) => config("flat filter has a0 = 1"),
            _ => Ok(()),
        }
    }

    pub fn regime(&self) -> FilterTaper {
        classify_filter_taper(self.gamma1).expect("validated")
    }

    pub fn case_id(&self) -> CaseId {
        CaseId::from_parts(self.regime(), self.dependence)
    }

    /// Effective scale: `c` when `γ₁ = 1`, otherwise 1.
    pub fn scale(&self) -> f64 {
        if self.gamma1 == 1.0 {
            self.c
        } else {
            1.0
        }
    }

    pub fn a0(&self) -> f64 {
        match self.a0_mode {
            A0Mode::One => 1.0,
            A0Mode::ZetaBalanced => -riemann_zeta(self.beta).expect("validated beta"),
        }
    }
}

/// `λ(n) = ⌊c n^{γ₁}⌋` with `c = 1` unless `γ₁ = 1`.
///
/// Values within `1e-9` relative of an integer are snapped to it, so
/// `10000^{0.5}` gives 100 even if `powf` rounds just below.
pub fn lambda_of(spec: &FilterSpec, n: u64) -> Result<u64> {
    if n == 0 {
        return domain("n must be positive");
    }
    let x = spec.scale() * (n as f64).powf(spec.gamma1);
    if !x.is_finite() || x >= 9.0e15 {
        return Err(Error::Capacity {
            requested: usize::MAX,
            cap: 1 << 53,
        });
    }
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        Ok(r as u64)
    } else {
        Ok(x.floor() as u64)
    }
}

/// `Σ_{i≥0} a_i`: `a_0 + ζ(β)` for SRD (so `1 + ζ(β)` by default) and exactly
/// 0 for ND.
pub fn filter_sum(spec: &FilterSpec) -> Result<f64> {
    spec.validate()?;
    match spec.dependence {
        Dependence::Srd => Ok(spec.a0() + riemann_zeta(spec.beta)?),
        Dependence::Nd => Ok(0.0),
        d => config(format!("the filter sum diverges for {d} filters")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    PowerLaw,
    Flat,
}

/// The filter `ã^{(n)}` for one sample size, evaluated lazily.
#[derive(Debug, Clone)]
pub struct Filter {
    spec: FilterSpec,
    kind: Kind,
    n: u64,
    lambda: u64,
    a0: f64,
    // a_0 + ζ(β): the constant in Σ_{i=0}^{K} a_i = κ + G(K)
    offset: f64,
    expansion: Option<PowerSumExpansion>,
}

impl Filter {
    pub fn new(spec: &FilterSpec, n: u64) -> Result<Filter> {
        spec.validate()?;
        let lambda = lambda_of(spec, n)?;
        let (kind, a0, offset, expansion) = match spec.dependence {
            Dependence::Flat => (Kind::Flat, 1.0, 0.0, None),
            _ => {
                let a0 = spec.a0();
                let zeta = riemann_zeta(spec.beta)?;
                let offset = match spec.a0_mode {
                    A0Mode::ZetaBalanced => 0.0,
                    A0Mode::One => a0 + zeta,
                };
                (Kind::PowerLaw, a0, offset, Some(PowerSumExpansion::new(spec.beta)))
            }
        };
        Ok(Filter {
            spec: *spec,
            kind,
            n,
            lambda,
            a0,
            offset,
            expansion,
        })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// `ã_i`, zero beyond `λ(n)`.
    #[inline]
    pub fn coeff(&self, i: u64) -> f64 {
        if i > self.lambda {
            0.0
        } else if i == 0 {
            self.a0
        } else {
            match self.kind {
                Kind::Flat => 1.0,
                Kind::PowerLaw => (i as f64).powf(-self.spec.beta),
            }
        }
    }

    /// `ã_0, …, ã_{len-1}` (entries past `λ` are zero).
    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|i| self.coeff(i)).collect()
    }

    /// The full array `ã_0..ã_λ`, refusing if it exceeds `cap` entries.
    pub fn materialize(&self, cap: usize) -> Result<Vec<f64>> {
        let len = self.lambda.saturating_add(1);
        if len > cap as u64 {
            return Err(Error::Capacity {
                requested: usize::try_from(len).unwrap_or(usize::MAX),
                cap,
            });
        }
        Ok(self.coefficients(len as usize))
    }

    /// Prefix sums `P(K) = Σ_{i=0}^{min(K,λ)} ã_i` for `K = 0..len`.
    ///
    /// Long power-law tables are anchored at the top by the asymptotic
    /// expansion and accumulated downward, which keeps the relative error of
    /// small prefix values (ND filters, where `P(K) → 0`) at rounding level.
    pub fn prefix_table(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        if len == 0 {
            return out;
        }
        let top = (len as u64 - 1).min(self.lambda);
        match self.kind {
            Kind::Flat => {
                for (k, p) in out.iter_mut().enumerate() {
                    *p = ((k as u64).min(self.lambda) + 1) as f64;
                }
                return out;
            }
            Kind::PowerLaw if top >= ASYMPTOTIC_START => {
                let anchor = self.prefix_asymptotic(top);
                let mut tail = KahanSum::new();
                out[top as usize] = anchor;
                for k in (0..top).rev() {
                    tail.add(((k + 1) as f64).powf(-self.spec.beta));
                    out[k as usize] = anchor - tail.sum();
                }
            }
            Kind::PowerLaw => {
                let mut acc = KahanSum::new();
                for k in 0..=top {
                    acc.add(self.coeff(k));
                    out[k as usize] = acc.sum();
                }
            }
        }
        let last = out[top as usize];
        for p in out.iter_mut().skip(top as usize + 1) {
            *p = last;
        }
        out
    }

    /// `P(K)` from the asymptotic expansion; accurate for `K ≥ 4096`.
    pub fn prefix_asymptotic(&self, k: u64) -> f64 {
        let k = k.min(self.lambda) as f64;
        match (self.kind, self.expansion) {
            (Kind::PowerLaw, Some(e)) => self.offset + e.value(k),
            _ => k + 1.0,
        }
    }

    /// Constant `κ` and expansion `G` with `P(K) = κ + G(K)` for large `K ≤ λ`.
    pub fn asymptotic_parts(&self) -> Option<(f64, PowerSumExpansion)> {
        self.expansion.map(|e| (self.offset, e))
    }

    pub fn is_flat(&self) -> bool {
        self.kind == Kind::Flat
    }
}

/// `ã^{(n)}` as an array of length `λ(n) + 1`.
pub fn build_filter(spec: &FilterSpec, n: u64) -> Result<Vec<f64>> {
    Filter::new(spec, n)?.materialize(DEFAULT_MATERIALIZE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn srd(beta: f64, gamma1: f64) -> FilterSpec {
        FilterSpec::new(Dependence::Srd, beta, gamma1, 1.0).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of(&srd(2.0, 0.5), 10_000).unwrap(), 100);
        let moderate = FilterSpec::new(Dependence::Srd, 2.0, 1.0, 0.5).unwrap();
        assert_eq!(lambda_of(&moderate, 10).unwrap(), 5);
        assert_eq!(lambda_of(&srd(2.0, 1.5), 100).unwrap(), 1000);
        // c is ignored off the moderate regime
        let s = FilterSpec::new(Dependence::Srd, 2.0, 0.5, 7.0).unwrap();
        assert_eq!(lambda_of(&s, 10_000).unwrap(), 100);
    }

    #[test]
    fn srd_filter_values() {
        // λ = 3 at n = 9 with γ₁ = 0.5
        let f = build_filter(&srd(2.0, 0.5), 9).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 1.0);
        assert_eq!(f[2], 0.25);
        assert!((f[3] - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn flat_filter() {
        let spec = FilterSpec::new(Dependence::Flat, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(build_filter(&spec, 4).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn nd_balancing() {
        let spec = FilterSpec::new(Dependence::Nd, 1.25, 0.5, 1.0).unwrap();
        assert!((spec.a0() + 4.595_111_825_842_944).abs() < 1e-10);
        assert_eq!(filter_sum(&spec).unwrap(), 0.0);
        assert!(FilterSpec::new(Dependence::Nd, 1.25, 0.5, 1.0)
            .unwrap()
            .with_a0_mode(A0Mode::One)
            .is_err());
    }

    #[test]
    fn filter_sums() {
        let s2 = FilterSpec::new(Dependence::Srd, 2.0, 0.5, 1.0)
            .unwrap()
            .with_a0_mode(A0Mode::One)
            .unwrap();
        assert!((filter_sum(&s2).unwrap() - 2.644_934_066_848_226).abs() < 1e-12);
        let s3 = FilterSpec::new(Dependence::Srd, 3.0, 0.5, 1.0).unwrap();
        assert!((filter_sum(&s3).unwrap() - 2.202_056_903_159_594).abs() < 1e-12);
        let lrd = FilterSpec::new(Dependence::Lrd, 0.75, 0.5, 1.0).unwrap();
        assert!(filter_sum(&lrd).is_err());
    }

    #[test]
    fn invalid_beta_rejected() {
        assert!(FilterSpec::new(Dependence::Lrd, 1.2, 0.5, 1.0).is_err());
        assert!(FilterSpec::new(Dependence::Srd, 0.9, 0.5, 1.0).is_err());
        assert!(FilterSpec::new(Dependence::Nd, 1.6, 0.5, 1.0).is_err());
        assert!(FilterSpec::new(Dependence::Flat, 0.5, 0.5, 1.0).is_err());
        assert!(FilterSpec::for_case(CaseId::new(4).unwrap(), 0.75, 0.5, 1.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify_filter_taper(0.5).unwrap(), FilterTaper::Strong);
        assert_eq!(classify_filter_taper(1.0).unwrap(), FilterTaper::Moderate);
        assert_eq!(classify_filter_taper(1.5).unwrap(), FilterTaper::Weak);
        assert_eq!(classify_innovation_taper(0.5, 1.2).unwrap(), InnovationTaper::Hard);
        assert_eq!(
            classify_innovation_taper(1.0 / 1.5, 1.5).unwrap(),
            InnovationTaper::Intermediate
        );
        assert_eq!(classify_innovation_taper(1.0, 1.5).unwrap(), InnovationTaper::Soft);
        assert!(classify_innovation_taper(0.5, 2.0).is_err());
    }

    #[test]
    fn case_table_round_trips() {
        for case in CaseId::all() {
            assert_eq!(CaseId::from_parts(case.regime(), case.dependence()), case);
        }
        assert_eq!(CaseId::new(9).unwrap().dependence(), Dependence::Nd);
        assert_eq!(CaseId::new(9).unwrap().regime(), FilterTaper::Moderate);
        assert!(CaseId::new(13).is_err());
    }

    #[test]
    fn prefix_table_matches_direct_sums() {
        for spec in [
            FilterSpec::new(Dependence::Nd, 1.25, 1.5, 1.0).unwrap(),
            FilterSpec::new(Dependence::Lrd, 0.75, 1.5, 1.0).unwrap(),
            srd(2.0, 1.5),
        ] {
            let f = Filter::new(&spec, 1000).unwrap();
            let table = f.prefix_table(20_000);
            let mut acc = KahanSum::new();
            for k in 0..20_000u64 {
                acc.add(f.coeff(k));
                let p = table[k as usize];
                assert!((p - acc.sum()).abs() <= 1e-12 * p.abs().max(1e-3), "{spec:?} k={k}");
            }
        }
    }
}
