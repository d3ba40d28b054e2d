use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taperflow_core::coefficients::{exact_variance, profile_for};
use taperflow_core::path_engine::{
    naive_convolution, partial_sums, ConvolutionMethod, EngineOptions, PathConfig, PathGenerator,
};
use taperflow_core::stats::{variance, variance_se};
use taperflow_core::{CaseId, Filter, FilterSpec, InnovationModel};

fn fft_only() -> EngineOptions {
    EngineOptions {
        fft_threshold: 0,
        ..EngineOptions::default()
    }
}

#[test]
fn fft_matches_naive_on_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let m: usize = rng.gen_range(1..=2048);
        let lambda: usize = rng.gen_range(0..=2048);
        let filter: Vec<f64> = (0..=lambda).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xi: Vec<f64> = (0..lambda + m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let cfg = PathConfig {
            filter: filter.clone(),
            innovation: InnovationModel::Gaussian,
            n: m as u64,
            t_grid: vec![1.0],
            seed: 0,
        };
        let gen = PathGenerator::new(&cfg, &fft_only()).unwrap();
        assert_eq!(gen.method(), ConvolutionMethod::Fft);
        let fast = gen.convolve(&xi).unwrap();
        let slow = naive_convolution(&filter, &xi);
        let scale = slow.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-9 * scale, "m={m} λ={lambda}");
        }
    }
}

#[test]
fn same_seed_same_path() {
    let cfg = PathConfig {
        filter: vec![1.0, 0.5, 0.25, 0.125],
        innovation: InnovationModel::TaperedPareto { alpha: 1.5, gamma: 0.4 },
        n: 5000,
        t_grid: vec![0.5, 1.0],
        seed: 42,
    };
    let a = PathGenerator::new(&cfg, &fft_only()).unwrap();
    let b = PathGenerator::new(&cfg, &fft_only()).unwrap();
    for stream in 0..3 {
        let (pa, pb) = (a.path(stream), b.path(stream));
        assert!(pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_ne!(a.path(0), a.path(1));
}

#[test]
fn path_is_linear_in_the_filter() {
    let f = vec![1.0, -0.3, 0.7, 0.2];
    let scaled: Vec<f64> = f.iter().map(|x| 2.5 * x).collect();
    let mk = |filter: Vec<f64>| PathConfig {
        filter,
        innovation: InnovationModel::Gaussian,
        n: 300,
        t_grid: vec![1.0],
        seed: 8,
    };
    let opts = EngineOptions::default();
    let p = PathGenerator::new(&mk(f), &opts).unwrap().path(0);
    let q = PathGenerator::new(&mk(scaled), &opts).unwrap().path(0);
    for (x, y) in p.iter().zip(&q) {
        assert!((2.5 * x - y).abs() <= 1e-14 * y.abs().max(1.0));
    }
}

#[test]
fn empirical_variance_matches_coefficients() {
    // j = 1: a long-memory filter with λ = 44 at n = 2000
    let n = 2000;
    let spec = FilterSpec::for_case(CaseId::new(1).unwrap(), 0.75, 0.5, 1.0).unwrap();
    let filter = Filter::new(&spec, n).unwrap();
    let cfg = PathConfig {
        filter: filter.materialize(1 << 20).unwrap(),
        innovation: InnovationModel::Gaussian,
        n,
        t_grid: vec![1.0],
        seed: 3,
    };
    let gen = PathGenerator::new(&cfg, &EngineOptions::default()).unwrap();
    let s: Vec<f64> = (0..4000)
        .map(|r| partial_sums(&gen.path(r), n, &[1.0]).unwrap()[0])
        .collect();
    let exact = exact_variance(&profile_for(&filter, 1.0).unwrap(), 1.0);
    let (v, se) = (variance(&s), variance_se(&s));
    assert!((v - exact).abs() <= 4.0 * se, "{v} vs {exact} (se {se})");
}
