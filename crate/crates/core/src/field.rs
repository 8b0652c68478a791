//! Dense d-dimensional grids.
//!
//! All fields share one layout: a contiguous grid with the last axis varying
//! fastest. Multi-channel fields ([`VectorField`], [`TensorField`]) store their
//! channels back to back (channel-major), so every channel is itself a
//! contiguous grid and axis-wise stencils can stream over it.

use crate::error::{Error, Result};

/// Grid extents `[N1, …, Nd]`. Every axis holds at least two samples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::dim("shape needs at least one axis"));
        }
        if let Some(axis) = dims.iter().position(|&n| n < 2) {
            return Err(Error::dim(format!(
                "axis {axis} has length {}; every axis needs at least 2 samples",
                dims[axis]
            )));
        }
        if dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .is_none()
        {
            return Err(Error::dim("grid size overflows usize"));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of axes `d`.
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for axis in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.dims[axis + 1];
        }
        strides
    }

    /// `(outer, n, inner)` such that element `(o, k, i)` along `axis` lives at
    /// `o * n * inner + k * inner + i`.
    pub(crate) fn axis_layout(&self, axis: usize) -> (usize, usize, usize) {
        let outer = self.dims[..axis].iter().product();
        let inner = self.dims[axis + 1..].iter().product();
        (outer, self.dims[axis], inner)
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.ndim() {
            return Err(Error::dim(format!(
                "axis {axis} out of range for a {}-dimensional grid",
                self.ndim()
            )));
        }
        Ok(())
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            index[axis] = offset % self.dims[axis];
            offset /= self.dims[axis];
        }
        index
    }
}

/// Common surface of grids with one or more channels.
///
/// Channel `c` occupies `as_slice()[c * len .. (c + 1) * len]` where `len` is
/// the number of grid points.
pub trait ChannelField: Clone {
    fn shape(&self) -> &Shape;
    fn channel_count(&self) -> usize;
    fn as_slice(&self) -> &[f64];
    fn as_mut_slice(&mut self) -> &mut [f64];
    /// A field of the same kind and shape holding `data`.
    fn with_data(&self, data: Vec<f64>) -> Self;

    fn channel(&self, c: usize) -> &[f64] {
        let len = self.shape().len();
        &self.as_slice()[c * len..(c + 1) * len]
    }

    fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.shape().len();
        &mut self.as_mut_slice()[c * len..(c + 1) * len]
    }

    fn zeros_like(&self) -> Self {
        self.with_data(vec![0.0; self.as_slice().len()])
    }

    fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    fn scaled(&self, factor: f64) -> Self {
        self.with_data(self.as_slice().iter().map(|v| v * factor).collect())
    }

    /// `self - other`; panics when layouts differ.
    fn minus(&self, other: &Self) -> Self {
        assert_same_layout(self, other);
        self.with_data(
            self.as_slice()
                .iter()
                .zip(other.as_slice())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `self + other`; panics when layouts differ.
    fn plus(&self, other: &Self) -> Self {
        assert_same_layout(self, other);
        self.with_data(
            self.as_slice()
                .iter()
                .zip(other.as_slice())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `self + alpha * other`; panics when layouts differ.
    fn plus_scaled(&self, alpha: f64, other: &Self) -> Self {
        assert_same_layout(self, other);
        self.with_data(
            self.as_slice()
                .iter()
                .zip(other.as_slice())
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }
}

fn assert_same_layout<F: ChannelField>(a: &F, b: &F) {
    assert_eq!(a.shape(), b.shape(), "field shapes differ");
    assert_eq!(
        a.channel_count(),
        b.channel_count(),
        "channel counts differ"
    );
}

/// A real value per grid point: an image, volume or video stack.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    shape: Shape,
    data: Vec<f64>,
}

impl ScalarField {
    /// Wraps `values` (last axis fastest). Rejects wrong lengths and
    /// non-finite entries.
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::dim(format!(
                "{} values supplied for a grid of {:?} ({} points)",
                values.len(),
                shape.dims(),
                shape.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "non-finite value {} at grid index {:?}",
                values[pos],
                shape.unravel(pos)
            )));
        }
        Ok(Self {
            shape,
            data: values,
        })
    }

    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: Shape, value: f64) -> Self {
        let data = vec![value; shape.len()];
        Self { shape, data }
    }

    /// Builds a field by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let data = (0..shape.len()).map(|o| f(&shape.unravel(o))).collect();
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.shape.offset(index)]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_raw(
            self.shape.clone(),
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Reorders axes: output axis `k` is input axis `order[k]`.
    pub fn permute_axes(&self, order: &[usize]) -> Result<Self> {
        let d = self.shape.ndim();
        let mut seen = vec![false; d];
        if order.len() != d
            || order
                .iter()
                .any(|&a| a >= d || std::mem::replace(&mut seen[a], true))
        {
            return Err(Error::dim(format!(
                "{order:?} is not a permutation of 0..{d}"
            )));
        }
        let dims: Vec<usize> = order.iter().map(|&a| self.shape.dims()[a]).collect();
        let out_shape = Shape::new(dims)?;
        let in_strides = self.shape.strides();
        let strides: Vec<usize> = order.iter().map(|&a| in_strides[a]).collect();
        let data = (0..out_shape.len())
            .map(|o| {
                let idx = out_shape.unravel(o);
                let src: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
                self.data[src]
            })
            .collect();
        Ok(Self::from_raw(out_shape, data))
    }
}

impl ChannelField for ScalarField {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn channel_count(&self) -> usize {
        1
    }

    fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn with_data(&self, data: Vec<f64>) -> Self {
        Self::from_raw(self.shape.clone(), data)
    }
}

/// `d` scalar channels on a d-dimensional grid, e.g. a gradient `(g_1, …, g_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    shape: Shape,
    data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.len() * shape.ndim()];
        Self { shape, data }
    }

    /// Builds from one value vector per channel; there must be exactly `d`.
    pub fn from_channels(shape: Shape, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.len() != shape.ndim() {
            return Err(Error::dim(format!(
                "{} channels supplied, a {}-dimensional vector field needs {}",
                channels.len(),
                shape.ndim(),
                shape.ndim()
            )));
        }
        let data = concat_channels(&shape, channels)?;
        Ok(Self { shape, data })
    }

    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), shape.len() * shape.ndim());
        Self { shape, data }
    }

    pub fn channel_field(&self, l: usize) -> ScalarField {
        ScalarField::from_raw(self.shape.clone(), self.channel(l).to_vec())
    }
}

impl ChannelField for VectorField {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn channel_count(&self) -> usize {
        self.shape.ndim()
    }

    fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn with_data(&self, data: Vec<f64>) -> Self {
        Self::from_raw(self.shape.clone(), data)
    }
}

/// `d × d` scalar channels; channel `(l, m)` sits at position `l * d + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    shape: Shape,
    data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(shape: Shape) -> Self {
        let d = shape.ndim();
        let data = vec![0.0; shape.len() * d * d];
        Self { shape, data }
    }

    /// Builds from `d²` channel vectors in row-major `(l, m)` order.
    pub fn from_channels(shape: Shape, channels: Vec<Vec<f64>>) -> Result<Self> {
        let d = shape.ndim();
        if channels.len() != d * d {
            return Err(Error::dim(format!(
                "{} channels supplied, a {d}-dimensional tensor field needs {}",
                channels.len(),
                d * d
            )));
        }
        let data = concat_channels(&shape, channels)?;
        Ok(Self { shape, data })
    }

    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), shape.len() * shape.ndim() * shape.ndim());
        Self { shape, data }
    }

    pub fn component(&self, l: usize, m: usize) -> &[f64] {
        self.channel(l * self.shape.ndim() + m)
    }
}

impl ChannelField for TensorField {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn channel_count(&self) -> usize {
        self.shape.ndim() * self.shape.ndim()
    }

    fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn with_data(&self, data: Vec<f64>) -> Self {
        Self::from_raw(self.shape.clone(), data)
    }
}

fn concat_channels(shape: &Shape, channels: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let len = shape.len();
    let mut data = Vec::with_capacity(len * channels.len());
    for (c, ch) in channels.into_iter().enumerate() {
        if ch.len() != len {
            return Err(Error::dim(format!(
                "channel {c} has {} values, grid has {len} points",
                ch.len()
            )));
        }
        if ch.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "channel {c} contains non-finite values"
            )));
        }
        data.extend(ch);
    }
    Ok(data)
}
