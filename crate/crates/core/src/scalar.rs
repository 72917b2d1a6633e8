use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point element type of the numerical kernels: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(requested, k·ε)`: tolerances below the type's resolution are unreachable.
    #[inline]
    fn tolerance(requested: f64, eps_multiple: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(eps_multiple);
        Self::lit(requested).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
