//! Numerical laboratory for the incompressible porous media (IPM) equation
//! near a stably stratified density.
//!
//! The crate is organised around a periodic pseudo-spectral discretization of
//! `𝕋 × [−L, L)`:
//!
//! * [`spectral`] grids, unitary transforms, fractional derivatives, Sobolev
//!   norms and the Darcy inversion `θ ↦ u`;
//! * [`linear`] exact evolution of the linearized problem around `ρ_s = −x2`
//!   and the slow-decay (sharpness) construction with its quadrature oracle;
//! * [`solver`] nonlinear RK4 integration of the perturbation equation;
//! * [`stratification`] level-set decomposition, the measure-preserving
//!   stratification `f*` and the potential energy;
//! * [`diagnostics`] norm series, time averages, power-law fits and energy
//!   balance.

pub mod diagnostics;
pub mod initial;
pub mod linear;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod stratification;

pub use profile::StratifiedProfile;
pub use spectral::{Grid, RealField, SpectralField};
