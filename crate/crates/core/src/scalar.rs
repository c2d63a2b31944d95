//! Floating-point abstraction: the crate is generic over the scalar type so
//! every algorithm runs in `f32` or `f64`; the crate-root aliases fix `f64`.

use num_complex::Complex;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` literal into the generic scalar.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal representable in the scalar type")
}

/// Complex number with the given real part and zero imaginary part.
#[inline]
pub fn cr<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}

/// Complex number from real and imaginary parts.
#[inline]
pub fn c<R: Real>(re: R, im: R) -> Complex<R> {
    Complex::new(re, im)
}

/// Unit imaginary.
#[inline]
pub fn im<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::one())
}

/// `exp(i theta)` on the unit circle.
#[inline]
pub fn cis<R: Real>(theta: R) -> Complex<R> {
    Complex::new(theta.cos(), theta.sin())
}
