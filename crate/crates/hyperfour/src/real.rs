//! Scalar abstraction over `f64` and [`Dd`], plus complex helpers that work
//! for both.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Num, NumAssign};

use crate::dd::Dd;

pub type C64 = Complex<f64>;
pub type Cdd = Complex<Dd>;

/// Real scalar usable as the coefficient field of series and quadratures.
pub trait Real:
    Copy + Num + NumAssign + Neg<Output = Self> + PartialOrd + Debug + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    fn ln2() -> Self;
    /// Unit roundoff.
    fn epsilon() -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn abs(self) -> Self;
    fn round(self) -> Self;
    fn floor(self) -> Self;
    fn to_dd(self) -> Dd;
    fn from_dd(d: Dd) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln2() -> Self {
        std::f64::consts::LN_2
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn round(self) -> Self {
        f64::round(self)
    }
    #[inline]
    fn floor(self) -> Self {
        f64::floor(self)
    }
    #[inline]
    fn to_dd(self) -> Dd {
        Dd::from_f64(self)
    }
    #[inline]
    fn from_dd(d: Dd) -> Self {
        d.to_f64()
    }
}

impl Real for Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn pi() -> Self {
        Dd::PI
    }
    fn ln2() -> Self {
        Dd::LN_2
    }
    fn epsilon() -> f64 {
        Dd::EPSILON
    }
    fn exp(self) -> Self {
        Dd::exp(self)
    }
    fn ln(self) -> Self {
        Dd::ln(self)
    }
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        Dd::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        Dd::atan2(self, x)
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    fn round(self) -> Self {
        Dd::round(self)
    }
    fn floor(self) -> Self {
        Dd::floor(self)
    }
    fn to_dd(self) -> Dd {
        self
    }
    fn from_dd(d: Dd) -> Self {
        d
    }
    fn from_i64(n: i64) -> Self {
        Dd::from_i64(n)
    }
}

#[inline]
pub fn c<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::from_f64(re), R::from_f64(im))
}

#[inline]
pub fn to_c64<R: Real>(z: Complex<R>) -> C64 {
    C64::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn from_c64<R: Real>(z: C64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// Shortest round-trip text for `x`, positional for moderate magnitudes
/// and exponential otherwise.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Converts between precisions, keeping every bit the target can hold.
#[inline]
pub fn cast_c<R: Real, S: Real>(z: Complex<R>) -> Complex<S> {
    Complex::new(S::from_dd(z.re.to_dd()), S::from_dd(z.im.to_dd()))
}

#[inline]
pub fn cabs<R: Real>(z: Complex<R>) -> R {
    let (a, b) = (z.re.abs(), z.im.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == R::zero() {
        return R::zero();
    }
    let r = small / big;
    big * (R::one() + r * r).sqrt()
}

#[inline]
pub fn cabs_f64<R: Real>(z: Complex<R>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

pub fn cexp<R: Real>(z: Complex<R>) -> Complex<R> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

/// Principal branch logarithm.
pub fn cln<R: Real>(z: Complex<R>) -> Complex<R> {
    Complex::new(cabs(z).ln(), z.im.atan2(z.re))
}

/// Principal branch power `z^a`.
pub fn cpow<R: Real>(z: Complex<R>, a: Complex<R>) -> Complex<R> {
    if z.re == R::zero() && z.im == R::zero() {
        return Complex::new(R::zero(), R::zero());
    }
    cexp(cln(z) * a)
}

pub fn csqrt<R: Real>(z: Complex<R>) -> Complex<R> {
    let r = cabs(z);
    let two = R::from_f64(2.0);
    let re = ((r + z.re) / two).sqrt();
    let im = ((r - z.re) / two).sqrt();
    if z.im < R::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

/// `e^{i pi z}` for complex `z`.
pub fn expipi<R: Real>(z: Complex<R>) -> Complex<R> {
    let pi = R::pi();
    cexp(Complex::new(-z.im * pi, z.re * pi))
}

#[inline]
pub fn cscale<R: Real>(z: Complex<R>, s: R) -> Complex<R> {
    Complex::new(z.re * s, z.im * s)
}
