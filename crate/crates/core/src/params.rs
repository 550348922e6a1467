//! Model coefficients.

use crate::error::{Error, Result};
use crate::num::Real;

/// Coefficients `(g, b, alpha)` of the growth-fragmentation equation
/// `u_t + (g x u)_x + b u = b alpha^2 u(t, alpha x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    g: T,
    b: T,
    alpha: T,
    log_alpha: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(g: T, b: T, alpha: T) -> Result<Self> {
        if !(alpha > T::one()) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be > 1, got {alpha}")));
        }
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::invalid("b", format!("must be > 0, got {b}")));
        }
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(Error::invalid("g", format!("must be >= 0, got {g}")));
        }
        Ok(Self {
            g,
            b,
            alpha,
            log_alpha: alpha.ln(),
        })
    }

    /// The `g = 0, b = 1` pure-fragmentation reduction.
    pub fn pure_fragmentation(alpha: T) -> Result<Self> {
        Self::new(T::zero(), T::one(), alpha)
    }

    #[inline]
    pub fn g(&self) -> T {
        self.g
    }

    #[inline]
    pub fn b(&self) -> T {
        self.b
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn log_alpha(&self) -> T {
        self.log_alpha
    }

    pub fn is_pure_fragmentation(&self) -> bool {
        self.g == T::zero() && self.b == T::one()
    }
}
