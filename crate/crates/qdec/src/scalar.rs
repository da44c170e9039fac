//! Scalar abstraction for the linear-algebra core.

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Real scalar the tensor core is generic over: `f32` or `f64`.
///
/// The shipped experiments instantiate everything at `f64` (see the aliases
/// at the crate root); `f32` compiles and runs but cannot meet the default
/// structural tolerances.
pub trait Scalar: RealField + FromPrimitive + Copy + Default {
    fn from_f(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
    fn from_u(x: usize) -> Self {
        Self::from_usize(x).expect("usize conversion")
    }
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}
