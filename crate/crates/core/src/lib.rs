//! Multidimensional TV-Stokes denoising.
//!
//! The model works in two steps. [`smoothing`] denoises the gradient field of
//! the input while keeping it a gradient field, using Chambolle-type dual
//! iterations with the spectral projector from [`spectral`].
//! [`reconstruction`] then recovers the image whose gradient directions match
//! the smoothed field. [`rof`] provides the classical ROF denoiser built on the
//! same dual kernel for comparison, and [`pipeline`] ties everything to the
//! raw volume format used by the `tvs` command-line tool.

pub mod calculus;
pub mod dual;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod pipeline;
pub mod reconstruction;
pub mod report;
pub mod rof;
pub mod slice;
pub mod smoothing;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ChannelField, ScalarField, Shape, TensorField, VectorField};
