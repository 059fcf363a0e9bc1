//! Scalar abstraction shared by the data containers, neighbor search and
//! classifiers.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point coordinate type.
///
/// Implemented for `f32` and `f64`. Everything that needs square roots or
/// logarithms (distances, thresholds, plan exponents) is written against this
/// trait, so the same classifiers run in single or double precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; total for the supported types.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + FromStr
        + Default
        + Send
        + Sync
        + 'static
{
}
