//! Image quality measures.

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// `10 log10(peak² / MSE)` in dB; `+∞` for identical fields.
pub fn psnr(reference: &ScalarField, test: &ScalarField, peak: f64) -> Result<f64> {
    if reference.shape() != test.shape() {
        return Err(Error::dim(format!(
            "psnr of {:?} and {:?} fields",
            reference.shape().dims(),
            test.shape().dims()
        )));
    }
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::param(format!("peak must be positive, got {peak}")));
    }
    let mse = reference
        .values()
        .iter()
        .zip(test.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.values().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Mean over interior grid points of `‖(u(i+e_l) - 2u(i) + u(i-e_l))_l‖₂`.
///
/// Vanishes on affine ramps and grows with the number and height of the
/// plateaus a denoiser leaves on smooth regions. Every axis needs at least
/// three samples.
pub fn staircase_metric(u: &ScalarField) -> Result<f64> {
    let shape = u.shape();
    if let Some(axis) = shape.dims().iter().position(|&n| n < 3) {
        return Err(Error::dim(format!(
            "staircase metric needs every axis >= 3, axis {axis} has {}",
            shape.dims()[axis]
        )));
    }
    let strides = shape.strides();
    let v = u.values();
    let mut sum = 0.0;
    let mut count = 0usize;
    for o in 0..shape.len() {
        let idx = shape.unravel(o);
        if idx
            .iter()
            .zip(shape.dims())
            .any(|(&i, &n)| i == 0 || i == n - 1)
        {
            continue;
        }
        let sq: f64 = strides
            .iter()
            .map(|&s| {
                let d2 = v[o + s] - 2.0 * v[o] + v[o - s];
                d2 * d2
            })
            .sum();
        sum += sq.sqrt();
        count += 1;
    }
    Ok(sum / count as f64)
}
