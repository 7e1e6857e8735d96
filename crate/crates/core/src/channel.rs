//! Additive white Gaussian noise keyed to the measured signal power.

use rand_distr::{Distribution, StandardNormal};

use crate::dsp::PassbandBlock;
use crate::error::{invalid_input, Result};
use crate::rng::stream_rng;
use crate::scalar::Real;

/// Noise settings for one block.
///
/// `snr_db` is the ratio of signal power to the noise power falling inside
/// the occupied band. `occupied_fraction` is that band's share of the real
/// noise bandwidth `[0, f_s/2]`; with the default of 1 the SNR is simply
/// signal power over total noise variance. `+inf` disables the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnConfig {
    pub snr_db: f64,
    pub seed: u64,
    pub occupied_fraction: f64,
}

impl AwgnConfig {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            seed,
            occupied_fraction: 1.0,
        }
    }

    pub fn with_occupied_fraction(mut self, fraction: f64) -> Self {
        self.occupied_fraction = fraction;
        self
    }

    pub fn noise_disabled(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// Per-sample noise variance for a signal of average power `power`.
    pub fn noise_variance(&self, power: f64) -> f64 {
        power / (10f64.powf(self.snr_db / 10.0) * self.occupied_fraction)
    }
}

/// `count` standard-normal draws (ziggurat over ChaCha8) for `seed`.
pub fn gaussian_stream(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed);
    (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn add_awgn<T: Real>(block: &PassbandBlock<T>, config: &AwgnConfig) -> Result<PassbandBlock<T>> {
    if block.is_empty() {
        return Err(invalid_input("cannot add noise to an empty block"));
    }
    if config.noise_disabled() {
        return Ok(block.clone());
    }
    if !config.snr_db.is_finite() {
        return Err(invalid_input(format!("snr_db {} is not usable", config.snr_db)));
    }
    if !(config.occupied_fraction > 0.0 && config.occupied_fraction <= 1.0) {
        return Err(invalid_input("occupied_fraction must lie in (0, 1]"));
    }
    let power = block.samples().iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>() / block.len() as f64;
    if power == 0.0 {
        return Err(invalid_input("signal power is zero; SNR is undefined"));
    }
    let sigma = config.noise_variance(power).sqrt();
    let noisy = block
        .samples()
        .iter()
        .zip(gaussian_stream(config.seed, block.len()))
        .map(|(&v, n)| v + T::lit(sigma * n))
        .collect();
    Ok(block.with_samples(noisy))
}
