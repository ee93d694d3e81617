//! Scalar abstraction shared by the numerical modules.

use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn of(x: f64) -> Self;

    /// Widens to `f64` for reporting.
    fn as_f64(self) -> f64;
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            #[inline(always)]
            fn of(x: f64) -> Self {
                x as $f
            }

            #[inline(always)]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

#[inline(always)]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline(always)]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline(always)]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}

/// Modulus `|z|`.
#[inline(always)]
pub fn abs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}
