//! Discrete differential calculus on grids with homogeneous Neumann boundary.
//!
//! The forward-difference matrix `D` has rows `[-1, 1]` and a zero last row, so
//! along axis `l` the gradient channel `g_l` always vanishes on the last slice.
//! `∇*` is the exact transpose of that stencil and the divergence is `-∇*`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{ChannelField, ScalarField, Shape, TensorField, VectorField};

/// Applies the square matrix `t` along `axis`:
/// `out[…, j, …] = Σ_k t[j, k] · u[…, k, …]`.
pub fn mode_apply(t: &DMatrix<f64>, axis: usize, u: &ScalarField) -> Result<ScalarField> {
    let shape = u.shape();
    shape.check_axis(axis)?;
    let n = shape.dims()[axis];
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::dim(format!(
            "{}x{} matrix applied along axis {axis} of length {n}",
            t.nrows(),
            t.ncols()
        )));
    }
    let (outer, _, inner) = shape.axis_layout(axis);
    let src = u.values();
    let mut out = vec![0.0; src.len()];
    let mut line = vec![0.0; n];
    for o in 0..outer {
        let base = o * n * inner;
        for i in 0..inner {
            for (k, x) in line.iter_mut().enumerate() {
                *x = src[base + k * inner + i];
            }
            for j in 0..n {
                out[base + j * inner + i] = (0..n).map(|k| t[(j, k)] * line[k]).sum();
            }
        }
    }
    Ok(ScalarField::from_raw(shape.clone(), out))
}

/// `dst = D_{×axis} src` on one channel.
fn diff_along(src: &[f64], dst: &mut [f64], shape: &Shape, axis: usize) {
    let (outer, n, inner) = shape.axis_layout(axis);
    for o in 0..outer {
        let base = o * n * inner;
        for k in 0..n - 1 {
            let row = base + k * inner;
            for i in 0..inner {
                dst[row + i] = src[row + inner + i] - src[row + i];
            }
        }
        let last = base + (n - 1) * inner;
        dst[last..last + inner].fill(0.0);
    }
}

/// `dst += Dᵀ_{×axis} src` on one channel. The last slice of `src` is ignored,
/// matching the zero last row of `D`.
fn diff_transpose_add(src: &[f64], dst: &mut [f64], shape: &Shape, axis: usize) {
    let (outer, n, inner) = shape.axis_layout(axis);
    for o in 0..outer {
        let base = o * n * inner;
        for k in 0..n - 1 {
            let row = base + k * inner;
            for i in 0..inner {
                let v = src[row + i];
                dst[row + i] -= v;
                dst[row + inner + i] += v;
            }
        }
    }
}

/// Forward-difference gradient `(D_{×1} u, …, D_{×d} u)`.
pub fn grad(u: &ScalarField) -> VectorField {
    let shape = u.shape();
    let len = shape.len();
    let mut data = vec![0.0; len * shape.ndim()];
    for (axis, chunk) in data.chunks_exact_mut(len).enumerate() {
        diff_along(u.values(), chunk, shape, axis);
    }
    VectorField::from_raw(shape.clone(), data)
}

/// Gradient of each channel: output channel `(l, m)` is `D_{×m} g_l`.
pub fn grad_vec(g: &VectorField) -> TensorField {
    let shape = g.shape();
    let (len, d) = (shape.len(), shape.ndim());
    let mut data = vec![0.0; len * d * d];
    for (c, chunk) in data.chunks_exact_mut(len).enumerate() {
        diff_along(g.channel(c / d), chunk, shape, c % d);
    }
    TensorField::from_raw(shape.clone(), data)
}

/// `∇* p = Σ_l Dᵀ_{×l} p_l`, the exact adjoint of [`grad`].
pub fn adjoint_grad(p: &VectorField) -> ScalarField {
    let shape = p.shape();
    let mut out = vec![0.0; shape.len()];
    for axis in 0..shape.ndim() {
        diff_transpose_add(p.channel(axis), &mut out, shape, axis);
    }
    ScalarField::from_raw(shape.clone(), out)
}

/// Output channel `l` is `Σ_m Dᵀ_{×m} p_{lm}`, the exact adjoint of [`grad_vec`].
pub fn adjoint_grad_tensor(p: &TensorField) -> VectorField {
    let shape = p.shape();
    let (len, d) = (shape.len(), shape.ndim());
    let mut data = vec![0.0; len * d];
    for (l, chunk) in data.chunks_exact_mut(len).enumerate() {
        for m in 0..d {
            diff_transpose_add(p.component(l, m), chunk, shape, m);
        }
    }
    VectorField::from_raw(shape.clone(), data)
}

/// `∇· v = -∇* v`, so that `⟨∇u, v⟩ = -⟨u, ∇·v⟩`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let mut out = adjoint_grad(v);
    out.as_mut_slice().iter_mut().for_each(|x| *x = -*x);
    out
}

/// Euclidean norm of the channel tuple at every grid point.
pub fn pointwise_norm<F: ChannelField>(q: &F) -> Vec<f64> {
    let len = q.shape().len();
    let mut sq = vec![0.0; len];
    for c in 0..q.channel_count() {
        for (s, v) in sq.iter_mut().zip(q.channel(c)) {
            *s += v * v;
        }
    }
    sq.iter_mut().for_each(|s| *s = s.sqrt());
    sq
}

fn divide_pointwise<F: ChannelField>(q: &F, denom: &[f64]) -> F {
    let mut out = q.clone();
    let len = denom.len();
    for chunk in out.as_mut_slice().chunks_exact_mut(len) {
        for (v, den) in chunk.iter_mut().zip(denom) {
            *v /= den;
        }
    }
    out
}

/// Divides every channel tuple by `max(1, |tuple|)`, projecting onto the
/// pointwise unit ball.
pub fn pointwise_unit_clip<F: ChannelField>(q: &F) -> F {
    let denom: Vec<f64> = pointwise_norm(q).into_iter().map(|n| n.max(1.0)).collect();
    divide_pointwise(q, &denom)
}

/// `g / max(|g|, eps)` pointwise.
pub fn pointwise_normalize(g: &VectorField, eps: f64) -> Result<VectorField> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let denom: Vec<f64> = pointwise_norm(g).into_iter().map(|n| n.max(eps)).collect();
    Ok(divide_pointwise(g, &denom))
}

/// Root of the sum of squares over all entries and channels.
pub fn l2<F: ChannelField>(x: &F) -> f64 {
    x.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Isotropic ℓ1 norm: sum over grid points of the channel tuple norm.
pub fn iso_l1<F: ChannelField>(x: &F) -> f64 {
    pointwise_norm(x).iter().sum()
}

/// Largest channel tuple norm over the grid.
pub fn linf_pointwise<F: ChannelField>(x: &F) -> f64 {
    pointwise_norm(x).into_iter().fold(0.0, f64::max)
}

/// Largest absolute entry over all channels.
pub fn max_abs<F: ChannelField>(x: &F) -> f64 {
    x.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn inner<F: ChannelField>(x: &F, y: &F) -> Result<f64> {
    if x.shape() != y.shape() || x.channel_count() != y.channel_count() {
        return Err(Error::dim(format!(
            "inner product of {:?}x{} and {:?}x{} fields",
            x.shape().dims(),
            x.channel_count(),
            y.shape().dims(),
            y.channel_count()
        )));
    }
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a * b)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(dims: &[usize]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    fn field(dims: &[usize], values: &[f64]) -> ScalarField {
        ScalarField::new(shape(dims), values.to_vec()).unwrap()
    }

    fn vector(dims: &[usize], channels: &[&[f64]]) -> VectorField {
        VectorField::from_channels(shape(dims), channels.iter().map(|c| c.to_vec()).collect())
            .unwrap()
    }

    fn diff_dense(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i + 1 < n && j == i {
                -1.0
            } else if i + 1 < n && j == i + 1 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn mode_apply_identity_and_stencil() {
        let u = field(&[3], &[1.0, 3.0, 2.0]);
        assert_eq!(mode_apply(&DMatrix::identity(3, 3), 0, &u).unwrap(), u);
        let du = mode_apply(&diff_dense(3), 0, &u).unwrap();
        assert_eq!(du.values(), &[2.0, -1.0, 0.0]);
        assert!(matches!(
            mode_apply(&DMatrix::identity(2, 2), 0, &u),
            Err(Error::Dimension(_))
        ));
        assert!(mode_apply(&DMatrix::identity(3, 3), 1, &u).is_err());
    }

    #[test]
    fn mode_apply_middle_axis_matches_index_formula() {
        let s = shape(&[2, 3, 2]);
        let u = ScalarField::from_fn(s, |i| (i[0] * 7 + i[1] * 3 + i[2]) as f64 * 0.5).unwrap();
        let t = DMatrix::from_fn(3, 3, |j, k| (j as f64 + 1.0) * (k as f64 - 1.0));
        let out = mode_apply(&t, 1, &u).unwrap();
        for i1 in 0..2 {
            for j in 0..3 {
                for i3 in 0..2 {
                    let want: f64 = (0..3).map(|i2| t[(j, i2)] * u.get(&[i1, i2, i3])).sum();
                    assert_eq!(out.get(&[i1, j, i3]), want);
                }
            }
        }
    }

    #[test]
    fn grad_examples() {
        let u = field(&[2, 2], &[0.0, 1.0, 2.0, 3.0]);
        let g = grad(&u);
        assert_eq!(g.channel(0), &[2.0, 2.0, 0.0, 0.0]);
        assert_eq!(g.channel(1), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            grad(&field(&[3], &[1.0, 3.0, 2.0])).channel(0),
            &[2.0, -1.0, 0.0]
        );
        let c = ScalarField::constant(shape(&[3, 4, 2]), 2.5);
        assert!(grad(&c).as_slice().iter().all(|&v| v == 0.0));
        assert!(adjoint_grad(&grad(&c)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grad_vec_examples() {
        let g = grad(&field(&[2, 2], &[0.0, 1.0, 2.0, 3.0]));
        let h = grad_vec(&g);
        assert_eq!(h.component(0, 0), &[-2.0, -2.0, 0.0, 0.0]);
        assert_eq!(h.channel_count(), 4);
        let g3 = VectorField::zeros(shape(&[2, 3, 2]));
        let h3 = grad_vec(&g3);
        assert_eq!(h3.channel_count(), 9);
        assert!(h3.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_examples() {
        let p = vector(&[2], &[&[1.0, 0.0]]);
        assert_eq!(adjoint_grad(&p).values(), &[-1.0, 1.0]);
        assert_eq!(divergence(&p).values(), &[1.0, -1.0]);
        let u = field(&[2], &[0.3, 1.7]);
        let lhs = inner(&grad(&u), &p).unwrap();
        let rhs = inner(&u, &adjoint_grad(&p)).unwrap();
        assert_eq!(lhs, 1.7 - 0.3);
        assert!((lhs - rhs).abs() < 1e-15);
        assert!(adjoint_grad(&VectorField::zeros(shape(&[3, 3])))
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn tensor_adjoint_single_channel_reduces_to_vector_adjoint() {
        let s = shape(&[3, 4]);
        let vals: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut chans = vec![vec![0.0; 12]; 4];
        chans[2] = vals.clone(); // (l, m) = (1, 0)
        let p = TensorField::from_channels(s.clone(), chans).unwrap();
        let out = adjoint_grad_tensor(&p);
        let single = VectorField::from_channels(s, vec![vals, vec![0.0; 12]]).unwrap();
        assert_eq!(out.channel(1), adjoint_grad(&single).values());
        assert!(out.channel(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn last_slice_of_gradient_vanishes() {
        let s = shape(&[3, 4, 5]);
        let u = ScalarField::from_fn(s.clone(), |i| ((i[0] * 13 + i[1] * 5 + i[2]) as f64).cos())
            .unwrap();
        let g = grad(&u);
        for o in 0..s.len() {
            let idx = s.unravel(o);
            for (l, (&i, &n)) in idx.iter().zip(s.dims()).enumerate() {
                if i == n - 1 {
                    assert_eq!(g.channel(l)[o], 0.0);
                }
            }
        }
    }

    #[test]
    fn clip_examples() {
        let q = vector(&[2, 2], &[&[0.3, 3.0, 0.0, 0.0], &[0.4, 4.0, 0.0, 0.0]]);
        let c = pointwise_unit_clip(&q);
        assert_eq!(c.channel(0)[0], 0.3);
        assert_eq!(c.channel(1)[0], 0.4);
        assert!((c.channel(0)[1] - 0.6).abs() < 1e-15);
        assert!((c.channel(1)[1] - 0.8).abs() < 1e-15);
        assert_eq!(c.channel(0)[2], 0.0);
    }

    #[test]
    fn normalize_examples() {
        let g = vector(&[2, 2], &[&[3.0, 0.0, 1e-12, 0.0], &[4.0, 0.0, 0.0, 0.0]]);
        let n = pointwise_normalize(&g, 1e-8).unwrap();
        assert!((n.channel(0)[0] - 0.6).abs() < 1e-15);
        assert!((n.channel(1)[0] - 0.8).abs() < 1e-15);
        assert_eq!(n.channel(0)[1], 0.0);
        assert!((n.channel(0)[2] - 1e-4).abs() < 1e-19);
        assert!(pointwise_normalize(&g, 0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        // A grid always has at least 2 points per axis; put the (3,4) tuple at
        // one point and zeros elsewhere, which leaves every norm unchanged.
        let v = vector(&[2, 2], &[&[3.0, 0.0, 0.0, 0.0], &[4.0, 0.0, 0.0, 0.0]]);
        assert_eq!(l2(&v), 5.0);
        assert_eq!(iso_l1(&v), 5.0);
        assert_eq!(linf_pointwise(&v), 5.0);

        let v = vector(&[2, 2], &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]);
        assert_eq!(iso_l1(&v), 2.0);
        assert_eq!(l2(&v), 2f64.sqrt());

        let s = shape(&[2, 2, 2]);
        let mut chans = vec![vec![0.0; 8]; 9];
        for ch in &mut chans {
            ch[0] = 1.0 / 3.0;
        }
        let t = TensorField::from_channels(s, chans).unwrap();
        assert!((iso_l1(&t) - 1.0).abs() < 1e-15);

        let a = field(&[2], &[1.0, 2.0]);
        let b = field(&[3], &[1.0, 2.0, 3.0]);
        assert!(matches!(inner(&a, &b), Err(Error::Dimension(_))));
    }
}
