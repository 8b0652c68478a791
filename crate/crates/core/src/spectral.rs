//! Spectral machinery for the difference operator.
//!
//! `DᵀD` is diagonalised by the orthonormal DCT-II matrix `C`:
//! `DᵀD = Cᵀ Σ² C` with `σ_i = 2 sin(π i / 2n)`, `i = 0..n`. Hence `∇*∇` on a
//! d-dimensional grid has eigenvalues `Σ_k σ_k[i_k]²`, which vanish only for
//! the constant mode. [`PoissonPlan`] applies `(∇*∇)†` with fast cosine
//! transforms and from it the orthogonal projector `Π = ∇(∇*∇)†∇*` onto
//! gradient fields.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::calculus::{adjoint_grad, grad};
use crate::error::{Error, Result};
use crate::field::{ChannelField, ScalarField, Shape, VectorField};

/// Dense forward-difference matrix: rows `[-1, 1]`, zero last row.
pub fn diff_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_len(n)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == n {
            0.0
        } else if j == i {
            -1.0
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    }))
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::dim(format!(
            "difference operator needs at least 2 samples, got {n}"
        )));
    }
    Ok(())
}

/// Singular values of `D` in ascending order, `σ_i = 2 sin(π i / 2n)`.
pub fn singular_values(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * (PI * i as f64 / (2.0 * n as f64)).sin())
        .collect()
}

/// Closed-form singular value decomposition of `D`.
///
/// `c` is the orthonormal DCT-II matrix and `s` the orthonormal DST-I matrix,
/// both with their textbook entries. With those entries
/// `[[0, S], [1, 0]] Σ C = -D`, so [`DiffFactors::left_factor`] flips the sign
/// of the `S` block to give `D = left_factor · Σ · C` with all factors
/// orthogonal. Dense matrices are kept for verification at small `n`.
#[derive(Clone, Debug)]
pub struct DiffFactors {
    pub n: usize,
    pub sigma: Vec<f64>,
    pub c: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

pub fn svd_factors(n: usize) -> Result<DiffFactors> {
    check_len(n)?;
    let nf = n as f64;
    let c = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt() * (PI * i as f64 * (2 * j + 1) as f64 / (2.0 * nf)).cos()
        }
    });
    let s = DMatrix::from_fn(n - 1, n - 1, |i, j| {
        (2.0 / nf).sqrt() * (PI * ((i + 1) * (j + 1)) as f64 / nf).sin()
    });
    Ok(DiffFactors {
        n,
        sigma: singular_values(n),
        c,
        s,
    })
}

impl DiffFactors {
    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.sigma))
    }

    /// `[[0, -S], [1, 0]]`.
    pub fn left_factor(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 1), (n - 1, n - 1)).copy_from(&(-&self.s));
        p[(n - 1, 0)] = 1.0;
        p
    }

    /// `left_factor · Σ · C`, equal to `D` up to roundoff.
    pub fn assemble(&self) -> DMatrix<f64> {
        self.left_factor() * self.sigma_matrix() * &self.c
    }
}

/// `‖∇‖₂ = 2 ‖[sin(π(N_k − 1)/(2N_k))]_k‖₂`, which tends to `2√d`.
pub fn grad_operator_norm(shape: &Shape) -> f64 {
    let sum: f64 = shape
        .dims()
        .iter()
        .map(|&n| {
            let s = (PI * (n - 1) as f64 / (2.0 * n as f64)).sin();
            s * s
        })
        .sum();
    2.0 * sum.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Multiply by `C`.
    Forward,
    /// Multiply by `Cᵀ`.
    Inverse,
}

/// Orthonormal DCT-II of one length, computed through a length-`n` complex FFT
/// of the even/odd reordered input.
#[derive(Clone)]
pub struct DctPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-iπk / 2n)`
    twiddle: Vec<Complex<f64>>,
    /// row normalisation of `C`
    scale: Vec<f64>,
}

impl std::fmt::Debug for DctPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DctPlan").field("n", &self.n).finish()
    }
}

/// Per-call workspace for [`DctPlan`].
#[derive(Default)]
pub struct DctScratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
    line: Vec<f64>,
}

impl DctPlan {
    pub fn new(n: usize) -> Result<Self> {
        check_len(n)?;
        let mut planner = FftPlanner::new();
        let nf = n as f64;
        let twiddle = (0..n)
            .map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2.0 * nf)))
            .collect();
        let mut scale = vec![(2.0 / nf).sqrt(); n];
        scale[0] = (1.0 / nf).sqrt();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddle,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn prepare(&self, scratch: &mut DctScratch) {
        let n = self.n;
        scratch.buf.resize(n, Complex::default());
        let fft_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        scratch.fft.resize(fft_len, Complex::default());
        scratch.line.resize(n, 0.0);
    }

    /// `x ← C x`.
    pub fn forward(&self, x: &mut [f64], scratch: &mut DctScratch) {
        let n = self.n;
        assert_eq!(x.len(), n);
        self.prepare(scratch);
        let buf = &mut scratch.buf;
        for j in 0..n.div_ceil(2) {
            buf[j] = Complex::new(x[2 * j], 0.0);
        }
        for j in 0..n / 2 {
            buf[n - 1 - j] = Complex::new(x[2 * j + 1], 0.0);
        }
        self.forward.process_with_scratch(buf, &mut scratch.fft);
        for k in 0..n {
            x[k] = self.scale[k] * (self.twiddle[k] * buf[k]).re;
        }
    }

    /// `x ← Cᵀ x`.
    pub fn inverse(&self, x: &mut [f64], scratch: &mut DctScratch) {
        let n = self.n;
        assert_eq!(x.len(), n);
        self.prepare(scratch);
        let y = &mut scratch.line;
        for k in 0..n {
            y[k] = x[k] / self.scale[k];
        }
        let buf = &mut scratch.buf;
        buf[0] = Complex::new(y[0], 0.0);
        for k in 1..n {
            buf[k] = self.twiddle[k].conj() * Complex::new(y[k], -y[n - k]);
        }
        self.inverse.process_with_scratch(buf, &mut scratch.fft);
        let inv_n = 1.0 / n as f64;
        for j in 0..n.div_ceil(2) {
            x[2 * j] = buf[j].re * inv_n;
        }
        for j in 0..n / 2 {
            x[2 * j + 1] = buf[n - 1 - j].re * inv_n;
        }
    }

    /// Transforms every line of `data` (laid out as `shape`) along `axis`.
    pub(crate) fn apply_along(
        &self,
        data: &mut [f64],
        shape: &Shape,
        axis: usize,
        direction: Direction,
        scratch: &mut DctScratch,
    ) {
        let (outer, n, inner) = shape.axis_layout(axis);
        debug_assert_eq!(n, self.n);
        let mut line = vec![0.0; n];
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                for (k, x) in line.iter_mut().enumerate() {
                    *x = data[base + k * inner + i];
                }
                match direction {
                    Direction::Forward => self.forward(&mut line, scratch),
                    Direction::Inverse => self.inverse(&mut line, scratch),
                }
                for (k, x) in line.iter().enumerate() {
                    data[base + k * inner + i] = *x;
                }
            }
        }
    }
}

/// Applies `C` (forward) or `Cᵀ` (inverse) along one axis.
pub fn dct_axis(u: &ScalarField, axis: usize, direction: Direction) -> Result<ScalarField> {
    u.shape().check_axis(axis)?;
    let plan = DctPlan::new(u.shape().dims()[axis])?;
    let mut out = u.clone();
    let shape = u.shape().clone();
    plan.apply_along(
        out.as_mut_slice(),
        &shape,
        axis,
        direction,
        &mut DctScratch::default(),
    );
    Ok(out)
}

/// Precomputed transforms and spectral weights for `(∇*∇)†` on one grid.
///
/// Immutable after construction; concurrent calls allocate their own scratch.
#[derive(Clone, Debug)]
pub struct PoissonPlan {
    shape: Shape,
    plans: Vec<DctPlan>,
    /// `1 / Σ_k σ_k[i_k]²`, zero at the constant mode.
    inv_eigen: Vec<f64>,
}

impl PoissonPlan {
    pub fn new(shape: &Shape) -> Result<Self> {
        let plans = shape
            .dims()
            .iter()
            .map(|&n| DctPlan::new(n))
            .collect::<Result<Vec<_>>>()?;
        let sigma_sq: Vec<Vec<f64>> = shape
            .dims()
            .iter()
            .map(|&n| singular_values(n).into_iter().map(|s| s * s).collect())
            .collect();
        let inv_eigen = (0..shape.len())
            .map(|o| {
                let idx = shape.unravel(o);
                let eig: f64 = idx.iter().zip(&sigma_sq).map(|(&i, s)| s[i]).sum();
                if o == 0 {
                    0.0
                } else {
                    1.0 / eig
                }
            })
            .collect();
        Ok(Self {
            shape: shape.clone(),
            plans,
            inv_eigen,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    fn check(&self, shape: &Shape) -> Result<()> {
        if shape != &self.shape {
            return Err(Error::dim(format!(
                "plan built for {:?}, field has {:?}",
                self.shape.dims(),
                shape.dims()
            )));
        }
        Ok(())
    }

    /// `(∇*∇)† f`. The constant-mode coefficient of the result is zero, so the
    /// output always has zero mean.
    pub fn solve(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f.shape())?;
        let mut data = f.values().to_vec();
        let mut scratch = DctScratch::default();
        for (axis, plan) in self.plans.iter().enumerate() {
            plan.apply_along(
                &mut data,
                &self.shape,
                axis,
                Direction::Forward,
                &mut scratch,
            );
        }
        for (x, w) in data.iter_mut().zip(&self.inv_eigen) {
            *x *= w;
        }
        for (axis, plan) in self.plans.iter().enumerate() {
            plan.apply_along(
                &mut data,
                &self.shape,
                axis,
                Direction::Inverse,
                &mut scratch,
            );
        }
        Ok(ScalarField::from_raw(self.shape.clone(), data))
    }

    /// `Π v = ∇(∇*∇)†∇* v`, the orthogonal projection onto gradient fields.
    pub fn project(&self, v: &VectorField) -> Result<VectorField> {
        self.check(v.shape())?;
        Ok(grad(&self.solve(&adjoint_grad(v))?))
    }
}

/// One-shot `(∇*∇)† f`; build a [`PoissonPlan`] to amortise over many calls.
pub fn poisson_solve(f: &ScalarField) -> Result<ScalarField> {
    PoissonPlan::new(f.shape())?.solve(f)
}

/// One-shot `Π v`.
pub fn projector_pi(v: &VectorField) -> Result<VectorField> {
    PoissonPlan::new(v.shape())?.project(v)
}
