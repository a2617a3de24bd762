//! Scalar abstraction for the closed-form layer.
//!
//! The equilibrium formulas and the statistics kernels are written against
//! this trait so they evaluate identically at `f32` and `f64`; concrete code
//! uses the [`crate::Real`] alias.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display {
    fn from_f(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Scalar")
    }
    fn from_u(v: u64) -> Self {
        Self::from_u64(v).expect("u64 converts to every Scalar")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display {}
