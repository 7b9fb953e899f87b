//! Scalar abstraction for the numeric kernels.
//!
//! Everything numeric in this crate is generic over [`Real`], which is `f32`
//! or `f64` in practice. Literal constants are injected through
//! [`Real::from_f64`]; for `f32` this rounds once, which is fine for the
//! tolerances any `f32` user can expect.

use num_traits::{Float, FloatConst, NumAssign};

pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;

    /// Lossless (f64) or rounded (f32) view of the value, for reporting.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Shorthand for injecting an `f64` literal into a generic context.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x)
}
