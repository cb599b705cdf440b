//! Floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for rates, concentrations and probabilities: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: u128) -> Self {
        Self::from_u128(n).unwrap_or_else(Self::infinity)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Euclidean norm of a slice.
pub fn norm2<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Maximum absolute entry of a slice (zero for an empty slice).
pub fn norm_inf<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, &x| acc.max(x.abs()))
}
