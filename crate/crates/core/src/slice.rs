//! Orthogonal slice export as binary 8-bit PGM (P5).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ScalarField, Shape};

/// The `(d-1)`-dimensional section `u[…, index at axis, …]`.
pub fn extract_slice(u: &ScalarField, axis: usize, index: usize) -> Result<ScalarField> {
    let shape = u.shape();
    if shape.ndim() < 2 {
        return Err(Error::dim("slicing needs a field with at least 2 axes"));
    }
    shape.check_axis(axis)?;
    let n = shape.dims()[axis];
    if index >= n {
        return Err(Error::dim(format!(
            "slice index {index} out of range for axis {axis} of length {n}"
        )));
    }
    let (outer, _, inner) = shape.axis_layout(axis);
    let mut dims = shape.dims().to_vec();
    dims.remove(axis);
    let mut data = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        let start = o * n * inner + index * inner;
        data.extend_from_slice(&u.values()[start..start + inner]);
    }
    ScalarField::new(Shape::new(dims)?, data)
}

/// Maps `v` linearly from `[lo, hi]` to `0..=255`; a flat range maps to 128.
pub fn to_gray(values: &[f64], range: Option<[f64; 2]>) -> Vec<u8> {
    let [lo, hi] = range.unwrap_or_else(|| {
        values
            .iter()
            .fold([f64::INFINITY, f64::NEG_INFINITY], |[a, b], &v| {
                [a.min(v), b.max(v)]
            })
    });
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return vec![128; values.len()];
    }
    values
        .iter()
        .map(|&v| ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Encodes a 1-D or 2-D field as P5; 1-D fields become a single row.
pub fn encode_pgm(image: &ScalarField, range: Option<[f64; 2]>) -> Result<Vec<u8>> {
    let (rows, cols) = match image.shape().dims() {
        [w] => (1, *w),
        [h, w] => (*h, *w),
        dims => {
            return Err(Error::dim(format!(
                "PGM export needs a 1-D or 2-D image, got dims {dims:?}"
            )))
        }
    };
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(to_gray(image.values(), range));
    Ok(out)
}

pub fn write_pgm(image: &ScalarField, range: Option<[f64; 2]>, path: &Path) -> Result<()> {
    let bytes = encode_pgm(image, range)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the slice at `index` along `axis` to `path`. The grey map spans
/// `range` when given, the slice extrema otherwise.
pub fn export_slice(
    u: &ScalarField,
    axis: usize,
    index: usize,
    range: Option<[f64; 2]>,
    path: &Path,
) -> Result<ScalarField> {
    let slice = extract_slice(u, axis, index)?;
    write_pgm(&slice, range, path)?;
    Ok(slice)
}
