//! Scalar abstraction shared by every numeric module.
//!
//! All geometry, the simplex solver and the grasp metric are written against
//! [`Real`], which is implemented for `f32` and `f64`. Tolerances are
//! per-type so that the single-precision build does not chase digits it
//! cannot represent.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// floating point scalar: f32 or f64
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Smallest simplex pivot magnitude accepted.
    fn pivot_tolerance() -> Self;
    /// Primal feasibility slack for the simplex solver.
    fn feasibility_tolerance() -> Self;
    /// Below this, a displacement is treated as the identity.
    fn identity_tolerance() -> Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn pivot_tolerance() -> Self {
        1e-11
    }
    fn feasibility_tolerance() -> Self {
        1e-7
    }
    fn identity_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn pivot_tolerance() -> Self {
        1e-6
    }
    fn feasibility_tolerance() -> Self {
        1e-4
    }
    fn identity_tolerance() -> Self {
        1e-5
    }
}
