//! Scalar abstraction shared by the numerical kernels, plus a log-scaled
//! complex number used where Airy values leave the floating-point range.

use std::fmt::{Debug, Display};
use std::ops::{Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Convert an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Convert an index or count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `exp(i*theta)`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A complex number stored as `mantissa * exp(exponent)` with a real
/// exponent. The mantissa is kept at unit modulus (or zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: Complex<T>,
    pub exponent: T,
}

impl<T: Real> Scaled<T> {
    pub fn new(mantissa: Complex<T>, exponent: T) -> Self {
        Self { mantissa, exponent }.normalized()
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(z, T::zero())
    }

    pub fn zero() -> Self {
        Self { mantissa: Complex::new(T::zero(), T::zero()), exponent: T::zero() }
    }

    fn normalized(self) -> Self {
        let r = self.mantissa.norm();
        if r == T::zero() || !r.is_finite() {
            return Self { mantissa: self.mantissa, exponent: if r == T::zero() { T::zero() } else { self.exponent } };
        }
        Self { mantissa: self.mantissa / r, exponent: self.exponent + r.ln() }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == T::zero() && self.mantissa.im == T::zero()
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_norm(&self) -> T {
        if self.is_zero() {
            T::neg_infinity()
        } else {
            self.mantissa.norm().ln() + self.exponent
        }
    }

    /// Plain complex value, or `None` when it is not representable.
    pub fn to_complex(&self) -> Option<Complex<T>> {
        if self.is_zero() {
            return Some(self.mantissa);
        }
        let f = self.exponent.exp();
        let v = self.mantissa * f;
        if is_finite_c(v) && f.is_finite() {
            Some(v)
        } else {
            None
        }
    }

    /// Value with the exponent shifted by `-shift`, i.e. `self * exp(-shift)`.
    pub fn rescaled(&self, shift: T) -> Complex<T> {
        self.mantissa * (self.exponent - shift).exp()
    }

    pub fn norm(&self) -> T {
        self.mantissa.norm() * self.exponent.exp()
    }

    pub fn conj(&self) -> Self {
        Self { mantissa: self.mantissa.conj(), exponent: self.exponent }
    }

    pub fn scale(self, k: Complex<T>) -> Self {
        Self::new(self.mantissa * k, self.exponent)
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let e = self.exponent.max(other.exponent);
        Self::new(self.rescaled(e) + other.rescaled(e), e)
    }

    /// Sum of `|a| + |b|` as a scaled magnitude, for cancellation estimates.
    pub fn abs_sum(self, other: Self) -> Self {
        let a = Self { mantissa: Complex::new(self.mantissa.norm(), T::zero()), exponent: self.exponent };
        let b = Self { mantissa: Complex::new(other.mantissa.norm(), T::zero()), exponent: other.exponent };
        a.add(b)
    }
}

impl<T: Real> Mul for Scaled<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl<T: Real> Div for Scaled<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl<T: Real> Neg for Scaled<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl<T: Real> Sub for Scaled<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add(-rhs)
    }
}

impl<T: Real> std::ops::Add for Scaled<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Scaled::add(self, rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for Scaled<T> {
    type Output = Self;
    fn mul(self, rhs: Complex<T>) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_arithmetic_matches_plain() {
        let a = Complex::new(3.0_f64, -4.0);
        let b = Complex::new(0.5_f64, 2.0);
        let (sa, sb) = (Scaled::from_complex(a), Scaled::from_complex(b));
        let close = |x: Complex<f64>, y: Complex<f64>| (x - y).norm() <= 1e-14 * y.norm().max(1.0);
        assert!(close((sa * sb).to_complex().unwrap(), a * b));
        assert!(close((sa - sb).to_complex().unwrap(), a - b));
        assert!(close((sa / sb).to_complex().unwrap(), a / b));
    }

    #[test]
    fn huge_products_stay_representable() {
        let big = Scaled::new(Complex::new(1.0_f64, 0.0), 800.0);
        let small = Scaled::new(Complex::new(2.0_f64, 0.0), -799.0);
        assert!(big.to_complex().is_none());
        let p = (big * small).to_complex().unwrap();
        assert!((p.re - 2.0 * 1.0_f64.exp()).abs() < 1e-12);
    }
}
