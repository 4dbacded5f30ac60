//! Scalar abstraction for confidence values and Dice scores.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type usable as a confidence or a score: `f32` or `f64`.
pub trait Confidence:
    Float + FromPrimitive + NumCast + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from a pixel count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("pixel count representable as float")
    }

    /// `true` when `0 <= self <= 1` (NaN is rejected).
    fn is_unit(self) -> bool {
        self >= Self::zero() && self <= Self::one()
    }
}

impl Confidence for f32 {}
impl Confidence for f64 {}
