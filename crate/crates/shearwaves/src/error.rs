//! Error taxonomy shared by the whole crate.

use std::fmt;

/// Result alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Why a computation could not be carried out.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Physically or structurally invalid inputs (wrong-sign flux,
    /// non-positive gravity, malformed grid, bad search interval, ...).
    InvalidInput(String),
    /// A formula was evaluated outside its admissible domain
    /// (e.g. a square-root radicand went non-positive).
    Domain { quantity: &'static str, detail: String },
    /// The dispersion residual never changes sign on the admissible
    /// search interval.
    NoDispersionRoot { gamma: f64 },
    /// A coefficient denominator vanished (or nearly so); the offending
    /// quantity is named.
    SingularCoefficient { name: &'static str },
    /// The height function lost monotonicity in p (wave speed reached
    /// the horizontal fluid velocity) at the reported point.
    Stagnation { q: f64, p: f64, b: f64 },
    /// The tridiagonal boundary-value solve hit a (near-)zero pivot,
    /// which signals a resonant mode.
    ResonantMode { mode: usize },
    /// An order-of-accuracy fit was attempted on data at the rounding
    /// floor; the offending norm is reported.
    DegenerateFit { rms: f64 },
    /// The requested residual level exceeds what any admissible
    /// amplitude can produce; the achievable range is reported.
    UnreachableEpsilon { requested: f64, achievable: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Domain { quantity, detail } => {
                write!(f, "domain error in {quantity}: {detail}")
            }
            Error::NoDispersionRoot { gamma } => {
                write!(f, "no dispersion root found for gamma = {gamma}")
            }
            Error::SingularCoefficient { name } => {
                write!(f, "coefficient denominator vanished: {name}")
            }
            Error::Stagnation { q, p, b } => {
                write!(f, "stagnation (h_p <= 0) at (q, p) = ({q}, {p}) for b = {b}")
            }
            Error::ResonantMode { mode } => {
                write!(f, "boundary-value solve is singular: mode n = {mode} is resonant")
            }
            Error::DegenerateFit { rms } => {
                write!(f, "order fit degenerate: residual norm {rms:e} is at the rounding floor")
            }
            Error::UnreachableEpsilon { requested, achievable } => {
                write!(
                    f,
                    "target residual level {requested:e} unreachable; \
                     largest admissible amplitude yields {achievable:e}"
                )
            }
        }
    }
}

impl std::error::Error for Error {}
