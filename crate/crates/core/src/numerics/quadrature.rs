//! Adaptive Gauss–Kronrod quadrature.
//!
//! The workhorse is a globally adaptive 7/15-point Gauss–Kronrod scheme: the
//! interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. Integrable endpoint
//! singularities are handled by the same bisection (the 15 Kronrod nodes
//! never touch the endpoints). Semi-infinite ranges are mapped onto a finite
//! interval with `x = a + 1/s`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).abs();
    Segment { a, b, value, err }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// partition with the supplied (sorted) breakpoints. Useful when the
/// integrand has known kinks or singular points.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::Domain("integration needs at least two points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("integration limits must be finite".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Domain("breakpoints must be nondecreasing".into()));
        }
        if w[1] > w[0] {
            heap.push(kronrod15(&mut f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 0,
        });
    }
    let mut subdivisions = heap.len();
    loop {
        let (value, err) = totals(&heap);
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite integrand value".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                abs_err: err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        // interval too small to split further
        if subdivisions >= opts.max_subdivisions || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let (value, err) = totals(&heap);
            // accept results that are limited only by floating-point resolution
            if err <= 1e3 * (opts.abs_tol.max(opts.rel_tol * value.abs())) {
                return Ok(Integral {
                    value,
                    abs_err: err,
                    subdivisions,
                });
            }
            return Err(Error::Numerical(format!(
                "adaptive quadrature hit its subdivision cap ({subdivisions}) with error estimate {err:e} on value {value:e}"
            )));
        }
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
        subdivisions += 1;
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut value = super::KahanSum::default();
    let mut err = 0.0;
    for s in heap.iter() {
        value.add(s.value);
        err += s.err;
    }
    (value.sum(), err)
}

/// Integrates `f` over `[a, ∞)`.
///
/// `[a, a + scale]` is integrated directly and the tail through the map
/// `x = a + scale / s`, `s ∈ (0, 1]`. The integrand must decay at least like
/// `x^{-1-ε}`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    if !(scale > 0.0) {
        return Err(Error::Domain("scale must be positive".into()));
    }
    let head = integrate(&mut f, a, a + scale, opts)?;
    let tail = integrate(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            f(a + scale / s) * scale / (s * s)
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(Integral {
        value: head.value + tail.value,
        abs_err: head.abs_err + tail.abs_err,
        subdivisions: head.subdivisions + tail.subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn semi_infinite_algebraic_tail() {
        // ∫_1^∞ x^{-1.5} dx = 2
        let r = integrate_to_infinity(|x| x.powf(-1.5), 1.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x| (-x).exp() * x * x, 0.0, 4.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], QuadOptions::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(|x| x, 1.0, 1.0, QuadOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
