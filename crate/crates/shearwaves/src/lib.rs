//! Asymptotic approximations of periodic travelling water waves over a flat
//! bed with constant vorticity, in the height-function formulation.
//!
//! The library constructs first-, second-, and third-order small-amplitude
//! expansions of the height function on the fixed rectangle
//! `(q, p) ∈ (−π, π) × (p0, 0)`, evaluates the exact interior and boundary
//! residual operators to certify the order of each approximation, calibrates
//! the amplitude and the third-order auxiliary parameter, derives physical
//! fields (surface profile, velocities, pressure, streamlines), and checks
//! every closed form against an independent finite-difference oracle.
//!
//! The core is generic over the scalar type through [`Real`]; concrete
//! `f64` aliases live at the crate root.

pub mod calibrate;
pub mod coeffs;
pub mod error;
pub mod expansion;
pub mod fields;
pub mod laminar;
pub mod oracle;
pub mod real;
pub mod residual;
pub mod terms;

pub use error::{Error, Result};
pub use real::Real;

/// Library version, embedded in output headers for reproducibility.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flow parameters over `f64`.
pub type FlowParams64 = laminar::FlowParams<f64>;
/// Bifurcation state over `f64`.
pub type LaminarState64 = laminar::LaminarState<f64>;
/// Truncated expansion over `f64`.
pub type Expansion64 = expansion::Expansion<f64>;
/// Evaluation grid over `f64`.
pub type Grid64 = residual::Grid<f64>;
/// Residual norms over `f64`.
pub type ResidualReport64 = residual::ResidualReport<f64>;
/// Calibration record over `f64`.
pub type CalibrationResult64 = calibrate::CalibrationResult<f64>;
/// Surface profile over `f64`.
pub type SurfaceProfile64 = fields::SurfaceProfile<f64>;
