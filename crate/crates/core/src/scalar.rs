//! Scalar abstraction: all numerical code is generic over [`Real`],
//! instantiated as `f32` or `f64` (the CLI uses `f64` throughout).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the numerical kernels.
pub trait Real: Float + FromPrimitive + AddAssign + Sum + Debug + Display + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + AddAssign + Sum + Debug + Display + 'static {}

/// Shorthand for converting an `f64` constant into the working scalar.
pub(crate) fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant not representable in scalar type")
}

pub(crate) fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("usize not representable in scalar type")
}

pub(crate) fn from_u32<T: Real>(x: u32) -> T {
    T::from_u32(x).expect("u32 not representable in scalar type")
}
