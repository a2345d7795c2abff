//! Real scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar usable for MPS tensors.
///
/// Implemented for `f32` and `f64`. Everything that leaves the numerical core
/// (reports, statistics, on-disk tensors) is carried as `f64`.
pub trait Scalar:
    RealField + Copy + Debug + Display + Default + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Convert an `f64` literal into this scalar.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    /// Widen to `f64`.
    #[inline]
    fn widen(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar widens to f64")
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;

    /// Smallest positive normal value.
    fn tiny() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }

    #[inline]
    fn tiny() -> Self {
        f64::MIN_POSITIVE
    }
}

impl Scalar for f32 {
    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }

    #[inline]
    fn tiny() -> Self {
        f32::MIN_POSITIVE
    }
}
