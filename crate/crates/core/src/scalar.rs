//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real floating-point scalar: `f32` or `f64`.
///
/// The numerical tolerances quoted throughout the documentation assume
/// `f64`; `f32` instantiations compile and run but at single precision.
pub trait Real:
    na::RealField + Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + std::fmt::Display
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar built on [`Real`].
pub type Cplx<T> = Complex<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    na::convert(x)
}

/// Lossy conversion to `f64` for reporting and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    nt::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn imag_unit<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::one())
}
