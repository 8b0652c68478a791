//! Synthetic test volumes.

use crate::error::Result;
use crate::field::{ScalarField, Shape};

/// Smooth quadratic ramp with an embedded ball of contrast `0.5`.
///
/// With `t_k = i_k / (N_k - 1)` the background is
/// `0.1 + 0.4 · Σ_k t_k² / d`, rising smoothly from 0.1 to 0.5. Points within
/// a quarter of the smallest extent from the grid centre get `+0.5`. Values lie
/// in `[0.1, 1.0]`.
pub fn ramp_with_ball(shape: &Shape) -> Result<ScalarField> {
    let d = shape.ndim() as f64;
    let dims = shape.dims().to_vec();
    let radius = dims.iter().copied().min().unwrap_or(2) as f64 / 4.0;
    ScalarField::from_fn(shape.clone(), |idx| {
        let mut ramp = 0.0;
        let mut r2 = 0.0;
        for (&i, &n) in idx.iter().zip(&dims) {
            let t = i as f64 / (n - 1) as f64;
            ramp += t * t;
            let c = i as f64 - (n - 1) as f64 / 2.0;
            r2 += c * c;
        }
        let ball = if r2 <= radius * radius { 0.5 } else { 0.0 };
        0.1 + 0.4 * ramp / d + ball
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_contrast() {
        let u = ramp_with_ball(&Shape::new(vec![16, 16, 16]).unwrap()).unwrap();
        assert!((u.min() - 0.1).abs() < 1e-12);
        assert!(u.max() <= 1.0 + 1e-12);
        let centre = u.get(&[8, 8, 8]);
        let outside = u.get(&[8, 8, 1]);
        assert!(centre - outside > 0.45);
    }
}
