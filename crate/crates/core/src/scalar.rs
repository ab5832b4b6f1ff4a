//! Scalar abstraction shared by the numeric modules.
//!
//! Decoding, smoothing and coordinate conversion are written once against
//! [`Scalar`] and instantiated for `f32` (the on-disk and on-wire precision)
//! or `f64` (for analysis and tests that want extra headroom).

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type usable throughout the crate.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Widens or narrows from the storage precision.
    fn from_storage(v: f32) -> Self;

    /// Converts to the storage precision, rounding to nearest.
    fn to_storage(self) -> f32;

    fn from_index(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable as float")
    }

    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 representable as scalar")
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_storage(v: f32) -> Self {
        v
    }

    #[inline]
    fn to_storage(self) -> f32 {
        self
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_storage(v: f32) -> Self {
        v as f64
    }

    #[inline]
    fn to_storage(self) -> f32 {
        self as f32
    }
}
