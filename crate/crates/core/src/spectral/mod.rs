//! Periodic grids, unitary Fourier transforms and spectral operators.

mod field;
mod grid;
mod ops;
pub mod snapshot;
mod transform;

pub use field::{forward, forward_on, inverse, inverse_on, RealField, SpectralField};
pub use grid::Grid;
pub use ops::{
    aniso_seminorm, d1, d2, dealias, dealias_in_place, frac_deriv, grad_linf, homogeneous_sq,
    retained, sobolev_norm, stream_function, velocity, vertical_velocity, Axis,
};
pub use snapshot::Snapshot;
pub(crate) use transform::fft1;

pub use rustfft::num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: Grid, right: Grid },
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("exponent {name} = {value} must be non-negative")]
    NegativeExponent { name: &'static str, value: f64 },
    #[error("malformed snapshot: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
