use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar the solver is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; every literal used by the crate is finite.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn pi() -> Self {
        Self::lit(std::f64::consts::PI)
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
