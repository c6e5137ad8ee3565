//! Scalar field abstraction.
//!
//! Every kernel in the crate is generic over [`Scalar`], implemented for
//! `f64` and [`Complex64`]. Double precision only.
//!
//! Convention used everywhere: `dot(x, y)` conjugates its FIRST argument,
//! so `dot(x, x)` is real and non-negative for both fields.

use num_complex::Complex64;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + PartialEq
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
{
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(re: f64) -> Self;

    /// Build a scalar from real and imaginary parts. Returns `None` when the
    /// field cannot represent a nonzero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;

    fn to_complex(self) -> Complex64;

    /// Project a complex value into this field. Lossless for `Complex64`;
    /// keeps the real part for `f64`.
    fn from_complex_lossy(z: Complex64) -> Self;

    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(re: f64) -> Self {
        re
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        if im == 0.0 {
            Some(re)
        } else {
            None
        }
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex_lossy(z: Complex64) -> Self {
        z.re
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex_lossy(z: Complex64) -> Self {
        z
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
}
