//! Dense reference operators assembled from Kronecker products, plus small
//! helpers shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use tvs_core::noise::GaussianSource;
use tvs_core::{ChannelField, ScalarField, Shape, VectorField};

/// Forward differences with a zero last row, written out entry by entry.
pub fn dense_d(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        d[(i, i)] = -1.0;
        d[(i, i + 1)] = 1.0;
    }
    d
}

/// `I ⊗ … ⊗ D ⊗ … ⊗ I` acting on the last-fastest flattening.
pub fn dense_axis_op(dims: &[usize], axis: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::identity(1, 1);
    for (k, &n) in dims.iter().enumerate() {
        let factor = if k == axis {
            op.clone()
        } else {
            DMatrix::identity(n, n)
        };
        m = m.kronecker(&factor);
    }
    m
}

/// The gradient as a `(d·N) × N` matrix, channel blocks stacked in order.
pub fn dense_grad(dims: &[usize]) -> DMatrix<f64> {
    let n: usize = dims.iter().product();
    let d = dims.len();
    let mut g = DMatrix::zeros(d * n, n);
    for (l, &len) in dims.iter().enumerate() {
        let block = dense_axis_op(dims, l, &dense_d(len));
        g.view_mut((l * n, 0), (n, n)).copy_from(&block);
    }
    g
}

pub fn shape(dims: &[usize]) -> Shape {
    Shape::new(dims.to_vec()).unwrap()
}

pub fn gaussian_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut src = GaussianSource::new(seed);
    (0..len).map(|_| src.sample()).collect()
}

pub fn random_scalar(dims: &[usize], seed: u64) -> ScalarField {
    let s = shape(dims);
    let n = s.len();
    ScalarField::new(s, gaussian_vec(n, seed)).unwrap()
}

pub fn random_vector(dims: &[usize], seed: u64) -> VectorField {
    let s = shape(dims);
    let n = s.len();
    let channels = (0..dims.len())
        .map(|l| gaussian_vec(n, seed.wrapping_mul(31).wrapping_add(l as u64)))
        .collect();
    VectorField::from_channels(s, channels).unwrap()
}

pub fn as_dvector<F: ChannelField>(f: &F) -> DVector<f64> {
    DVector::from_column_slice(f.as_slice())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
