//! Scalar abstraction shared by every ratio, agreement statistic and test
//! statistic in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point scalar the metrics are computed in: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Debug
    + Display
    + Default
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from a count.
    fn from_count(n: u64) -> Self {
        <Self as NumCast>::from(n).expect("count representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as NumCast>::from(x).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `num / den`, or `None` when the denominator is zero.
pub fn ratio<F: Real>(num: u64, den: u64) -> Option<F> {
    (den > 0).then(|| F::from_count(num) / F::from_count(den))
}
