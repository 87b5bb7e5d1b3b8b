//! Numeric traits the library is generic over.
//!
//! [`Scalar`] only needs field arithmetic and an ordering, so grids, kernels
//! and exact propagation also run on [`BigRational`](crate::Rational) where
//! every moment identity holds with equality. [`Real`] adds the transcendental
//! functions needed by sampling, quantiles and the Gaussian comparisons.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive, Zero};

pub trait Scalar:
    Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Allowed deviation of a transition triple's sum from one.
    fn sum_tolerance() -> Self;

    /// Allowed excursion of a probability outside `[0, 1]` before it is
    /// treated as infeasible.
    fn range_tolerance() -> Self;

    fn from_i64_exact(v: i64) -> Self {
        Self::from_i64(v).expect("every scalar type represents i64 values")
    }

    /// Converts an `f64` literal; rationals take the exact binary value.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn sum_tolerance() -> Self {
        1e-12
    }

    fn range_tolerance() -> Self {
        4.0 * f64::EPSILON
    }
}

impl Scalar for f32 {
    fn sum_tolerance() -> Self {
        1e-5
    }

    fn range_tolerance() -> Self {
        4.0 * f32::EPSILON
    }
}

impl Scalar for BigRational {
    fn sum_tolerance() -> Self {
        BigRational::zero()
    }

    fn range_tolerance() -> Self {
        BigRational::zero()
    }

    fn from_i64_exact(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Floating-point scalars.
pub trait Real: Scalar + Float {
    /// Complementary error function.
    fn erfc(self) -> Self;

    fn erf(self) -> Self {
        Self::one() - self.erfc()
    }
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn erf(self) -> Self {
        libm::erf(self)
    }
}

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn erf(self) -> Self {
        libm::erff(self)
    }
}

/// Neumaier-compensated sum. Exact types accumulate with zero compensation.
pub(crate) fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for term in terms {
        let t = sum.clone() + term.clone();
        if sum.abs_val() >= term.abs_val() {
            carry = carry + ((sum - t.clone()) + term);
        } else {
            carry = carry + ((term - t.clone()) + sum);
        }
        sum = t;
    }
    sum + carry
}
