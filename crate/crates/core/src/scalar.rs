//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the kinematics, losses and metrics are generic over.
///
/// Implemented for `f32` and `f64`. Tolerance-sensitive checks (Jacobian
/// verification, Fréchet distance on rank-deficient data) are intended for
/// `f64`; `f32` is supported for bulk evaluation of stored clips.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type (rounding for `f32`).
    #[inline]
    fn lit(v: f64) -> Self {
        nalgebra::convert(v)
    }

    /// Widens (or passes through) to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_subset_unchecked()
    }
}

impl Real for f32 {}
impl Real for f64 {}
