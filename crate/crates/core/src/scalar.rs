//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// The tolerances are precision dependent. `f64` uses the absolute
/// normalization tolerance `1e-12`; `f32` cannot resolve that and uses `1e-5`.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + Serialize + 'static
{
    /// Absolute tolerance on probability normalization.
    const NORMALIZATION_TOL: f64;
    /// Cluster masses below this are frozen at zero by the solver.
    const ZERO_MASS: f64;

    /// Converts an `f64` literal or computed value into this scalar.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NORMALIZATION_TOL: f64 = 1e-12;
    const ZERO_MASS: f64 = 1e-15;
}

impl Scalar for f32 {
    const NORMALIZATION_TOL: f64 = 1e-5;
    const ZERO_MASS: f64 = 1e-15;
}
