//! Scalar abstraction: everything numerical is generic over [`Real`].

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the library is generic over.
///
/// `f32` and `f64` both satisfy the bound; the crate root re-exports
/// `f64`-specialised aliases for the common case.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    ///
    /// Used for numeric constants appearing in closed-form coefficients;
    /// conversion of a finite `f64` can only fail for exotic scalar types,
    /// which the blanket implementation excludes.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }

    /// Converts `self` into `f64` (for error payloads and output formatting).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar must convert to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + Debug
        + Display
        + AddAssign
        + SubAssign
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for `F::of` used throughout the crate internals.
pub(crate) fn lit<F: Real>(x: f64) -> F {
    F::of(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        let x: f64 = lit(0.125);
        assert_eq!(x, 0.125);
        let y: f32 = lit(0.125);
        assert_eq!(y, 0.125_f32);
        assert_eq!(0.125_f64.as_f64(), 0.125);
    }
}
