//! Scalar abstractions.
//!
//! [`Real`] is the floating-point bound used by every real-valued matrix in
//! the crate. [`Sample`] is the much weaker bound needed by the butterfly
//! network: it only has to add, subtract and negate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Per-entry tolerance for orthonormality checks at this precision.
    fn orthonormal_tolerance() -> Self {
        let floor = Self::lit(1e-12);
        let scaled = Self::epsilon() * Self::lit(1024.0);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Values that can flow through an additions-only signal-flow graph.
pub trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    /// Multiplication by two, i.e. a one-bit left shift for integers.
    fn double(self) -> Self;
}

macro_rules! int_sample {
    ($($t:ty),*) => {$(
        impl Sample for $t {
            #[inline]
            fn double(self) -> Self {
                self << 1
            }
        }
    )*};
}

macro_rules! float_sample {
    ($($t:ty),*) => {$(
        impl Sample for $t {
            #[inline]
            fn double(self) -> Self {
                self * 2.0
            }
        }
    )*};
}

int_sample!(i32, i64);
float_sample!(f32, f64);
