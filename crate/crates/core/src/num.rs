//! Scalar abstraction shared by every numerical route.

use std::fmt::{Debug, Display};

use num_traits as nt;

/// Complex scalar over the working precision.
pub type ComplexValue<T> = num_complex::Complex<T>;

/// Floating-point types the solvers are generic over (`f32`, `f64`).
pub trait Real:
    nt::Float
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the working precision.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: nt::Float
        + nt::FloatConst
        + nt::FromPrimitive
        + nt::NumAssign
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// `exp(s * ln_base)` for a complex exponent and a real log-base.
#[inline]
pub fn real_pow_complex<T: Real>(ln_base: T, s: ComplexValue<T>) -> ComplexValue<T> {
    (s * ln_base).exp()
}
