//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tghar::{
    simulate, ArCoeffs, Covariates, ModelSpec, RegressionSpec, TghParams, TghShape, TimeSeries,
    Variant,
};

/// The simulation scenario with harmonic covariates: g = 0.3, h = 0.1,
/// phi = 0.8.
pub fn scenario(variant: Variant) -> ModelSpec {
    ModelSpec::new(
        variant,
        TghParams::new(-3.0, 1.5, TghShape::new(0.3, 0.1).unwrap()).unwrap(),
        ArCoeffs::new(vec![0.8]).unwrap(),
        RegressionSpec::new(vec![3.0, -2.0]),
    )
}

pub fn series(spec: &ModelSpec, n: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate(spec, &Covariates::harmonics(n, 24.0, 1), &mut rng).unwrap()
}

/// Evenly spaced points of `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
