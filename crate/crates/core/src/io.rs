//! Raw volume files.
//!
//! A volume is a pair `<name>.raw` (little-endian samples, last axis fastest)
//! and `<name>.json`, the [`VolumeHeader`]. `f32` payloads are widened to
//! `f64` on load and narrowed with round-to-nearest-even on save.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    #[default]
    Little,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    #[default]
    #[serde(rename = "last-fastest")]
    LastFastest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeHeader {
    pub dims: Vec<usize>,
    pub dtype: DType,
    pub byte_order: ByteOrder,
    pub layout: Layout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_range: Option<[f64; 2]>,
}

impl VolumeHeader {
    pub fn new(dims: Vec<usize>, dtype: DType) -> Self {
        Self {
            dims,
            dtype,
            byte_order: ByteOrder::Little,
            layout: Layout::LastFastest,
            value_range: None,
        }
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.dims.clone()).map_err(|e| Error::Format(format!("header dims: {e}")))
    }

    pub fn payload_len(&self) -> Result<usize> {
        Ok(self.shape()?.len() * self.dtype.size())
    }

    fn validate(&self) -> Result<()> {
        self.shape()?;
        if let Some([lo, hi]) = self.value_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Format(format!(
                    "value_range [{lo}, {hi}] must be finite with min < max"
                )));
            }
        }
        Ok(())
    }
}

/// A loaded volume: its samples and the header they came with.
#[derive(Clone, Debug)]
pub struct Volume {
    pub header: VolumeHeader,
    pub field: ScalarField,
}

/// `<stem>.json` next to a `<stem>.raw` payload.
pub fn header_path_for(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

pub fn read_header(path: &Path) -> Result<VolumeHeader> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: VolumeHeader = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: malformed header: {e}", path.display())))?;
    header.validate()?;
    Ok(header)
}

pub fn write_header(header: &VolumeHeader, path: &Path) -> Result<()> {
    header.validate()?;
    let text = serde_json::to_string_pretty(header).expect("header serialises");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn decode_payload(header: &VolumeHeader, bytes: &[u8]) -> Result<ScalarField> {
    let shape = header.shape()?;
    let want = header.payload_len()?;
    if bytes.len() != want {
        return Err(Error::Format(format!(
            "payload has {} bytes, header {:?} {:?} requires {want}",
            bytes.len(),
            header.dims,
            header.dtype
        )));
    }
    let values: Vec<f64> = match header.dtype {
        DType::F64 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
        DType::F32 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
    };
    ScalarField::new(shape, values).map_err(|e| Error::Format(format!("payload: {e}")))
}

pub fn encode_payload(field: &ScalarField, dtype: DType) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.values().len() * dtype.size());
    match dtype {
        DType::F64 => field
            .values()
            .iter()
            .for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        DType::F32 => field
            .values()
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
    }
    out
}

pub fn load_volume(data_path: &Path, header_path: &Path) -> Result<Volume> {
    let header = read_header(header_path)?;
    let bytes = fs::read(data_path).map_err(|e| Error::io(data_path, e))?;
    let field = decode_payload(&header, &bytes)
        .map_err(|e| Error::Format(format!("{}: {e}", data_path.display())))?;
    Ok(Volume { header, field })
}

/// Writes `field` using `dtype` and `value_range` from `template`; the header's
/// dims are taken from the field.
pub fn save_volume(
    field: &ScalarField,
    template: &VolumeHeader,
    data_path: &Path,
    header_path: &Path,
) -> Result<()> {
    let header = VolumeHeader {
        dims: field.shape().dims().to_vec(),
        ..template.clone()
    };
    write_header(&header, header_path)?;
    fs::write(data_path, encode_payload(field, header.dtype)).map_err(|e| Error::io(data_path, e))
}

/// Stacks equally shaped frames along a new last axis, e.g. `T` frames of
/// `[H, W]` become one `[H, W, T]` volume.
pub fn stack_frames(frames: &[ScalarField]) -> Result<ScalarField> {
    let first = frames
        .first()
        .ok_or_else(|| Error::dim("no frames to stack"))?;
    if let Some(bad) = frames.iter().position(|f| f.shape() != first.shape()) {
        return Err(Error::dim(format!(
            "frame {bad} has shape {:?}, frame 0 has {:?}",
            frames[bad].shape().dims(),
            first.shape().dims()
        )));
    }
    let mut dims = first.shape().dims().to_vec();
    dims.push(frames.len());
    let shape = Shape::new(dims)?;
    let t = frames.len();
    let mut data = vec![0.0; shape.len()];
    for (k, frame) in frames.iter().enumerate() {
        for (o, v) in frame.values().iter().enumerate() {
            data[o * t + k] = *v;
        }
    }
    ScalarField::new(shape, data)
}
