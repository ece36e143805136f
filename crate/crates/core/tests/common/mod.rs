#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvphi::synthetic::two_region_image;
use tvphi::{add_gaussian_noise, Cutoff, Image, MollifierFamily, PhiSpec, SolverConfig};

pub const BENCH_SIGMA: f64 = 30.0;
pub const BENCH_SEED: u64 = 7;
pub const BENCH_Q: f64 = 0.5;
pub const BENCH_M: f64 = 10.0;
pub const BENCH_ALPHA_INF: f64 = 0.0253;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Clean two-region image and its noisy version.
pub fn benchmark() -> (Image, Image) {
    let clean = two_region_image(64);
    let noisy = add_gaussian_noise(&clean, BENCH_SIGMA, BENCH_SEED).unwrap();
    (clean, noisy)
}

pub fn benchmark_config() -> SolverConfig {
    let mut cfg = SolverConfig::new(BENCH_Q, Cutoff::Finite(BENCH_M), BENCH_ALPHA_INF);
    cfg.noise_variance = BENCH_SIGMA * BENCH_SIGMA;
    cfg
}

/// Benchmark configuration with `η_0 = factor · α` on three dyadic levels from `ε_1 = 2`.
pub fn benchmark_config_with_eta(factor: f64) -> SolverConfig {
    let mut cfg = benchmark_config();
    let alpha = cfg.alpha().unwrap();
    cfg.family = MollifierFamily::dyadic(2.0, 3, factor * alpha).unwrap();
    cfg.levels = 3;
    cfg
}

pub fn random_image(w: usize, h: usize, scale: f64, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(w, h, |_, _| scale * rng.random::<f64>())
}

/// Draws from the density `∝ exp(-α φ(t))` on `[0, t_max]` by inverting a
/// trapezoid-rule CDF tabulated on a fine grid.
pub fn inverse_cdf_samples(phi: &PhiSpec, alpha: f64, t_max: f64, n: usize, seed: u64) -> Vec<f64> {
    let grid = 200_000;
    let dt = t_max / grid as f64;
    let density = |t: f64| (-alpha * phi.value(t)).exp();
    let mut cdf = vec![0.0; grid + 1];
    for i in 1..=grid {
        cdf[i] = cdf[i - 1] + 0.5 * (density((i - 1) as f64 * dt) + density(i as f64 * dt)) * dt;
    }
    let total = cdf[grid];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let j = cdf.partition_point(|&c| c < u).clamp(1, grid);
            let (c0, c1) = (cdf[j - 1], cdf[j]);
            ((j - 1) as f64 + (u - c0) / (c1 - c0)) * dt
        })
        .collect()
}
