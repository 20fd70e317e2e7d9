//! Scalar abstraction for the statistics code.
//!
//! Everything in [`crate::stats`] is written against [`Real`], so the same
//! routines run on `f32` and `f64`. Configuration and optimizer types are
//! pinned to `f64` because they round-trip through JSON and CSV.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by the statistical routines.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts a small literal. Panics only if the type cannot represent it,
    /// which never happens for the constants used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
}
