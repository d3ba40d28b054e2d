use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taperflow_core::innovations::{centered_abs_moment, moment_zeta, BaseDistribution, InnovationModel};
use taperflow_core::numerics::{integrate, integrate_to_infinity, QuadOptions};
use taperflow_core::TaperedParetoSpec;

fn opts() -> QuadOptions {
    QuadOptions::with_tol(0.0, 1e-12)
}

/// `∫ g(x) f(x) dx` over `[1, ∞)`, split at `b`, in `ln x` on the Pareto branch.
fn density_integral<G: Fn(f64) -> f64>(spec: &TaperedParetoSpec, g: G) -> f64 {
    let (a, b) = (spec.alpha(), spec.b());
    let head = if b > 1.0 {
        integrate(
            |y: f64| {
                let x = y.exp();
                g(x) * a * (-a * y).exp()
            },
            0.0,
            b.ln(),
            opts(),
        )
        .unwrap()
        .value
    } else {
        0.0
    };
    let tail = integrate_to_infinity(|x: f64| g(x) * spec.density(x), b, 1.0, opts())
        .unwrap()
        .value;
    head + tail
}

#[test]
fn density_integrates_to_one() {
    for alpha in [0.8, 1.2, 1.5, 2.0] {
        for b in [1.0, 2.0, 10.0, 1e3] {
            let spec = TaperedParetoSpec::new(alpha, b).unwrap();
            let total = density_integral(&spec, |_| 1.0);
            assert!((total - 1.0).abs() < 1e-10, "α={alpha} b={b}: {total}");
        }
    }
}

#[test]
fn sampler_ks_below_one_percent_critical_value() {
    let r = 100_000;
    // asymptotic 1% critical value of the one-sample KS statistic
    let crit = 1.628 / (r as f64).sqrt();
    for (i, alpha) in [0.8, 1.2, 1.5, 2.0].into_iter().enumerate() {
        for (l, b) in [1.0, 2.0, 10.0, 1e3].into_iter().enumerate() {
            let spec = TaperedParetoSpec::new(alpha, b).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            rng.set_stream((4 * i + l) as u64);
            let mut xs: Vec<f64> = (0..r).map(|_| spec.sample(&mut rng)).collect();
            xs.sort_by(|a, b| a.total_cmp(b));
            let mut d: f64 = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let f = spec.cdf(x);
                d = d.max((i + 1) as f64 / r as f64 - f).max(f - i as f64 / r as f64);
            }
            assert!(d < crit, "α={alpha} b={b}: KS {d} ≥ {crit}");
        }
    }
}

#[test]
fn centered_samples_have_mean_zero() {
    let model = InnovationModel::TaperedPareto { alpha: 1.5, gamma: 0.4 };
    let inn = model.resolve(100_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = 1_000_000;
    let xs: Vec<f64> = (0..r).map(|_| inn.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / r as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r as f64 - 1.0)).sqrt();
    assert!(mean.abs() < 4.0 * sd / 1e3, "mean {mean}, sd {sd}");
}

#[test]
fn moments_match_density_quadrature() {
    for alpha in [0.8, 1.2, 1.5] {
        for b in [1.0, 2.0, 10.0, 1e3] {
            let spec = TaperedParetoSpec::new(alpha, b).unwrap();
            for r in [0.5, 1.0, 2.0, 3.0] {
                let got = moment_zeta(&spec, r).unwrap();
                let want = density_integral(&spec, |x| x.powf(r));
                assert!(
                    (got - want).abs() <= 1e-9 * want,
                    "α={alpha} b={b} r={r}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn b_equal_one_is_shifted_exponential() {
    let spec = TaperedParetoSpec::new(1.3, 1.0).unwrap();
    // E(1+R)^r for r = 1, 2, 3
    for (r, want) in [(1.0, 2.0), (2.0, 5.0), (3.0, 16.0)] {
        assert!((moment_zeta(&spec, r).unwrap() - want).abs() < 1e-12);
    }
    assert!((spec.variance() - 1.0).abs() < 1e-12);
    // E|R - 1|³ = 12/e - 2
    let want = 12.0 / std::f64::consts::E - 2.0;
    assert!((centered_abs_moment(&spec, 3.0).unwrap() - want).abs() < 1e-9);
}

#[test]
fn standardized_bases_are_standardized() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = 200_000;
    for base in [
        BaseDistribution::Uniform,
        BaseDistribution::Exponential,
        BaseDistribution::Rademacher,
        BaseDistribution::Laplace,
    ] {
        let inn = InnovationModel::Standardized { base }.resolve(10).unwrap();
        let xs: Vec<f64> = (0..r).map(|_| inn.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / r as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r as f64 - 1.0);
        assert!(mean.abs() < 4.0 / (r as f64).sqrt(), "{base:?} mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "{base:?} var {var}");
    }
}
