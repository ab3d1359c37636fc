//! Floating point scalars used by the geometric side of the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating point type the space models, mappings and iterations are written over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// (10⁻⁹, 10⁻¹²) are only attainable in `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite inputs.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when comparing points for equality.
    fn point_eq_tol() -> Self;
}

impl Scalar for f32 {
    fn point_eq_tol() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn point_eq_tol() -> Self {
        1e-12
    }
}
