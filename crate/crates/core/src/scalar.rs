//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type the model can be evaluated in. Implemented for `f32` and `f64`.
pub trait Real:
    'static + Float + FromPrimitive + Debug + Display + Default + Send + Sync + Sum
{
    /// Converts an `f64` literal into `Self`.
    fn lit(value: f64) -> Self;

    /// Lossy conversion used for error reporting and CSV output.
    fn as_f64(self) -> f64;

    /// Relative error of `self` against `reference`, falling back to the absolute error
    /// when the reference is zero.
    fn rel_err(self, reference: Self) -> Self {
        let denom = reference.abs();
        if denom > Self::zero() {
            (self - reference).abs() / denom
        } else {
            (self - reference).abs()
        }
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(value: f64) -> Self {
                value as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
