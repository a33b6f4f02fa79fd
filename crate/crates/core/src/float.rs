//! Scalar abstraction for the numerical core.
//!
//! Every analytic quantity in this crate (pole locations, Green functions,
//! scattering amplitudes) is generic over the floating-point type so the same
//! formulas run in `f32` or `f64`. Production paths and all file formats use
//! `f64`; see the aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;

/// Floating-point scalar usable throughout the numerical core.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal. Panics only for non-finite overflow into the
    /// target type, which cannot happen for the fixed constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert to scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar must convert to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// `hbar * c` in eV·nm, the only dimensional constant of the model. Converts
/// photon energies (eV) to wavevectors (nm^-1).
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// Complex number with both parts zero.
#[inline]
pub fn czero<T: Float>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// The imaginary unit.
#[inline]
pub fn ci<T: Float>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Real scalar lifted to a complex number.
#[inline]
pub fn cre<T: Float>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
