//! Reproducible additive Gaussian noise.
//!
//! Samples come from ChaCha20 seeded with `seed_from_u64(seed)`. Each 64-bit
//! output is turned into a uniform double in `[0, 1)` by keeping its top 53
//! bits, and pairs of uniforms `(a, b)` become two standard normals via the
//! Box-Muller transform
//! `r = sqrt(-2 ln(1 - a))`, `z0 = r cos(2πb)`, `z1 = r sin(2πb)`.
//! Grid points receive `z0, z1, z0', z1', …` in storage order, so the noise is
//! bit-identical across platforms for a given seed.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Stream of standard normal samples.
pub struct GaussianSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - a lies in (0, 1], so the log is finite.
        let a = self.uniform();
        let b = self.uniform();
        let r = (-2.0 * (1.0 - a).ln()).sqrt();
        let (s, c) = (2.0 * PI * b).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// `u + sigma · z` with `z` i.i.d. standard normal from [`GaussianSource`].
pub fn add_gaussian_noise(u: &ScalarField, sigma: f64, seed: u64) -> Result<ScalarField> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!(
            "noise sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(u.clone());
    }
    let mut source = GaussianSource::new(seed);
    Ok(u.map(|v| v + sigma * source.sample()))
}
