//! Scalar abstraction over the floating-point type used by the numeric core.
//!
//! Everything downstream is generic over [`Scalar`], with `f64` as the
//! default via the [`Real`](crate::Real) alias. `f32` is supported for
//! quick exploratory runs; the acceptance tolerances assume `f64`.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Error function, needed for Gaussian CDFs.
    fn erf(self) -> Self;

    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable in scalar type")
    }

    fn from_usize_c(v: usize) -> Self {
        Self::from_usize(v).expect("usize not representable in scalar type")
    }

    fn pi() -> Self {
        Self::from_f64c(std::f64::consts::PI)
    }

    /// log(2π), the normalizing constant of Gaussian log-densities.
    fn ln_two_pi() -> Self {
        Self::from_f64c((2.0 * std::f64::consts::PI).ln())
    }

    fn half() -> Self {
        Self::from_f64c(0.5)
    }

    fn two() -> Self {
        Self::from_f64c(2.0)
    }

    /// Standard normal CDF.
    fn std_normal_cdf(self) -> Self {
        let inv_sqrt2 = Self::from_f64c(std::f64::consts::FRAC_1_SQRT_2);
        Self::half() * ((self * inv_sqrt2).erf() + Self::one())
    }
}

impl Scalar for f64 {
    fn erf(self) -> Self {
        statrs::function::erf::erf(self)
    }
}

impl Scalar for f32 {
    fn erf(self) -> Self {
        statrs::function::erf::erf(self as f64) as f32
    }
}
