//! Scalar abstraction shared by every numerical module.
//!
//! All physics in this crate is written against [`Real`], so the same code runs in
//! `f64` (the default, see the aliases in the crate root) or `f32` for cheap sweeps.
//! Tolerances are always supplied by the caller; the `f32` instantiation simply cannot
//! reach the tight ones.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};

pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Relative machine precision.
    fn eps() -> Self {
        Self::epsilon()
    }

    fn from_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Shorthand for `Complex::new(re, im)` with literal arguments.
#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `i` in the working precision.
#[inline]
pub fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}
