//! Scalar abstraction: the whole pipeline is generic over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar used for pixel intensities and all derived
/// quantities (blur scales, descriptor values, match distances).
///
/// Implemented by `f32` and `f64`. Pipelines needing tight tolerances
/// (sub-pixel refinement, descriptor normalization) should prefer `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Cast a configuration constant into the working scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    /// Widen to `f64` (used for text formatting and hashing).
    #[inline]
    fn widen(self) -> f64 {
        self.to_f64().expect("Real widens to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssignOps
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn of_and_widen_round_trip() {
        assert_eq!(<f64 as Real>::of(1.6), 1.6);
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
        assert_eq!(1.25f32.widen(), 1.25f64);
    }
}
