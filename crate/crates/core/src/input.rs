//! Input biphoton amplitudes.
//!
//! The analytic SPDC model evaluates anywhere in C^2 (the scattering pole sums
//! need values at complex frequencies); measured grids evaluate on the real
//! plane only, which restricts them to the quadrature engine path.

use num_complex::Complex;

use crate::config::PumpParams;
use crate::float::{cre, Float, HBAR_C_EV_NM};
use crate::grid::JsaGrid;

/// `sin(z)/z` with a Taylor fallback near the origin (relative error below
/// 1e-17 inside the switchover radius).
pub fn sinc<T: Float>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1.0e-4) {
        let z2 = z * z;
        let one = Complex::new(T::one(), T::zero());
        one - z2 / cre(T::lit(6.0)) + z2 * z2 / cre(T::lit(120.0))
    } else {
        z.sin() / z
    }
}

/// Wavevector mismatches (parallel, perpendicular) in nm^-1 for signal/idler
/// energies in eV:
///
/// `dk_par = n [w_p - (w_s cos t1 + w_i cos t2)] / (hbar c)`
/// `dk_perp = n (w_s sin t1 - w_i sin t2) / (hbar c)`
///
/// The refractive index is frequency-independent here, so the pump and
/// half-pump indices coincide. Supports complex arguments for analytic
/// continuation.
pub fn wavevector_mismatch<T: Float>(
    omega_s: Complex<T>,
    omega_i: Complex<T>,
    pump: &PumpParams<T>,
) -> (Complex<T>, Complex<T>) {
    let hbar_c = T::lit(HBAR_C_EV_NM);
    let n = pump.refractive_index;
    let (c1, s1) = (pump.theta1_rad().cos(), pump.theta1_rad().sin());
    let (c2, s2) = (pump.theta2_rad().cos(), pump.theta2_rad().sin());
    let par = (cre(pump.omega_p) - omega_s * cre(c1) - omega_i * cre(c2)) * cre(n / hbar_c);
    let perp = (omega_s * cre(s1) - omega_i * cre(s2)) * cre(n / hbar_c);
    (par, perp)
}

/// Analytic SPDC joint spectral amplitude
/// `F(w_s, w_i) = Gamma(w_s + w_i) sinc(dk_par L / 2) sinc(dk_perp L / 2)`
/// with the Gaussian pump envelope `Gamma(w) = exp[-(w - w_p)^2 / 4 sigma_p^2]`.
///
/// Entire in both arguments and real on the real axis up to real Taylor
/// coefficients, so it obeys the Schwarz reflection
/// `F(conj z_s, conj z_i) = conj F(z_s, z_i)`.
#[derive(Debug, Clone)]
pub struct SpdcJsa<T: Float> {
    pub pump: PumpParams<T>,
}

impl<T: Float> SpdcJsa<T> {
    pub fn new(pump: PumpParams<T>) -> Self {
        Self { pump }
    }

    pub fn amplitude(&self, zs: Complex<T>, zi: Complex<T>) -> Complex<T> {
        let p = &self.pump;
        let sum = zs + zi;
        let dw = sum - cre(p.omega_p);
        let four = T::lit(4.0);
        let envelope = (-(dw * dw) / cre(four * p.sigma_p * p.sigma_p)).exp();
        let (dk_par, dk_perp) = wavevector_mismatch(zs, zi, p);
        let half_l = cre(p.crystal_length_nm() * T::lit(0.5));
        envelope * sinc(dk_par * half_l) * sinc(dk_perp * half_l)
    }

    /// Width of the `w_s + w_i` support: beyond `|w_s + w_i - w_p| >
    /// 13 sigma_p` the Gaussian alone pushes the modulus below 1e-18 on the
    /// real plane.
    pub fn sum_support(&self) -> (T, T) {
        let half = T::lit(13.0) * self.pump.sigma_p;
        (self.pump.omega_p - half, self.pump.omega_p + half)
    }
}

/// An input JSA the scattering engine can consume.
///
/// `eval_complex` returns `None` for sampled data, which has no analytic
/// continuation; the pole-sum engine path requires `Some`.
pub trait InputJsa<T: Float>: Sync {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T>;

    fn eval_complex(&self, zs: Complex<T>, zi: Complex<T>) -> Option<Complex<T>>;

    fn is_analytic(&self) -> bool {
        self.eval_complex(
            Complex::new(T::zero(), T::zero()),
            Complex::new(T::zero(), T::zero()),
        )
        .is_some()
    }

    /// Range of `w_s + w_i` outside which the amplitude is negligible, if the
    /// source knows one. Used to bound integration windows.
    fn sum_window(&self) -> Option<(T, T)> {
        None
    }
}

impl<T: Float> InputJsa<T> for SpdcJsa<T> {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T> {
        self.amplitude(cre(omega_s), cre(omega_i))
    }

    fn eval_complex(&self, zs: Complex<T>, zi: Complex<T>) -> Option<Complex<T>> {
        Some(self.amplitude(zs, zi))
    }

    fn sum_window(&self) -> Option<(T, T)> {
        Some(self.sum_support())
    }
}

impl<T: Float> InputJsa<T> for JsaGrid<T> {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T> {
        self.sample(omega_s, omega_i)
    }

    fn eval_complex(&self, _zs: Complex<T>, _zi: Complex<T>) -> Option<Complex<T>> {
        None
    }

    fn sum_window(&self) -> Option<(T, T)> {
        let (s0, s1) = self.axis_s_range();
        let (i0, i1) = self.axis_i_range();
        Some((s0 + i0, s1 + i1))
    }
}

/// Runtime choice between the analytic model and a measured grid.
#[derive(Debug, Clone)]
pub enum InputSource<T: Float> {
    Spdc(SpdcJsa<T>),
    Measured(JsaGrid<T>),
}

impl<T: Float> InputJsa<T> for InputSource<T> {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T> {
        match self {
            InputSource::Spdc(s) => s.eval_real(omega_s, omega_i),
            InputSource::Measured(g) => g.eval_real(omega_s, omega_i),
        }
    }

    fn eval_complex(&self, zs: Complex<T>, zi: Complex<T>) -> Option<Complex<T>> {
        match self {
            InputSource::Spdc(s) => s.eval_complex(zs, zi),
            InputSource::Measured(g) => g.eval_complex(zs, zi),
        }
    }

    fn sum_window(&self) -> Option<(T, T)> {
        match self {
            InputSource::Spdc(s) => s.sum_window(),
            InputSource::Measured(g) => g.sum_window(),
        }
    }
}

/// Pointwise linear combination `a F1 + b F2` of two sources. Analytic only
/// when both operands are.
#[derive(Debug, Clone)]
pub struct LinearCombination<A, B, T: Float> {
    pub a: Complex<T>,
    pub first: A,
    pub b: Complex<T>,
    pub second: B,
}

impl<T: Float, A: InputJsa<T>, B: InputJsa<T>> InputJsa<T> for LinearCombination<A, B, T> {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T> {
        self.a * self.first.eval_real(omega_s, omega_i)
            + self.b * self.second.eval_real(omega_s, omega_i)
    }

    fn eval_complex(&self, zs: Complex<T>, zi: Complex<T>) -> Option<Complex<T>> {
        match (self.first.eval_complex(zs, zi), self.second.eval_complex(zs, zi)) {
            (Some(x), Some(y)) => Some(self.a * x + self.b * y),
            _ => None,
        }
    }

    fn sum_window(&self) -> Option<(T, T)> {
        match (self.first.sum_window(), self.second.sum_window()) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
            _ => None,
        }
    }
}

/// Closure-backed analytic input, for tests and synthetic sources.
pub struct FnJsa<T: Float, F: Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync> {
    pub f: F,
    pub sum_window: Option<(T, T)>,
}

impl<T: Float, F: Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync> FnJsa<T, F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            sum_window: None,
        }
    }
}

impl<T: Float, F: Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync> InputJsa<T> for FnJsa<T, F> {
    fn eval_real(&self, omega_s: T, omega_i: T) -> Complex<T> {
        (self.f)(cre(omega_s), cre(omega_i))
    }

    fn eval_complex(&self, zs: Complex<T>, zi: Complex<T>) -> Option<Complex<T>> {
        Some((self.f)(zs, zi))
    }

    fn sum_window(&self) -> Option<(T, T)> {
        self.sum_window
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn pump() -> PumpParams<f64> {
        PumpParams {
            omega_p: 3.62,
            sigma_p: 0.010,
            crystal_length_mm: 0.1,
            theta1_deg: 3.5,
            theta2_deg: 3.5,
            refractive_index: 1.0,
        }
    }

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sinc_series_consistent_at_switchover() {
        for &r in &[9.9e-5, 1.01e-4] {
            let z = c64(r, r * 0.3);
            let direct = z.sin() / z;
            assert!((sinc(z) - direct).norm() < 1e-16);
        }
        assert_eq!(sinc(c64(0.0, 0.0)), c64(1.0, 0.0));
    }

    #[test]
    fn mismatch_at_degenerate_point() {
        let p = pump();
        let w = c64(1.81, 0.0);
        let (par, perp) = wavevector_mismatch(w, w, &p);
        assert_eq!(perp, c64(0.0, 0.0));
        let expected = 3.62 * (1.0 - (3.5f64).to_radians().cos()) / HBAR_C_EV_NM;
        assert_relative_eq!(par.re, expected, max_relative = 1e-14);
        assert!(par.im.abs() < 1e-300);
    }

    #[test]
    fn mismatch_swap_symmetry() {
        let p = pump();
        let (a, b) = (c64(1.79, 0.0), c64(1.84, 0.0));
        let (par1, perp1) = wavevector_mismatch(a, b, &p);
        let (par2, perp2) = wavevector_mismatch(b, a, &p);
        assert!((par1 - par2).norm() < 1e-18);
        assert!((perp1 + perp2).norm() < 1e-18);
    }

    #[test]
    fn spdc_degenerate_value() {
        let jsa = SpdcJsa::new(pump());
        let v = jsa.amplitude(c64(1.81, 0.0), c64(1.81, 0.0));
        // Gamma = 1 and the perpendicular sinc is 1; the parallel sinc is
        // evaluated from the exact mismatch chain.
        let (par, _) = wavevector_mismatch(c64(1.81, 0.0), c64(1.81, 0.0), &pump());
        let arg = par.re * 0.1e6 / 2.0;
        assert_relative_eq!(v.re, arg.sin() / arg, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-300);
        // Order of magnitude pinned: ~0.579 for these parameters.
        assert!((v.re - 0.579).abs() < 5e-3, "value {v}");
    }

    #[test]
    fn gaussian_envelope_ratio() {
        // At w_s + w_i = w_p + 2 sigma_p the envelope alone is e^-1; divide
        // out the phase-matching factors to isolate it.
        let jsa = SpdcJsa::new(pump());
        let w = c64(1.81 + 0.010, 0.0);
        let full = jsa.amplitude(w, w);
        let (par, perp) = wavevector_mismatch(w, w, &pump());
        let half_l = c64(0.1e6 / 2.0, 0.0);
        let envelope = full / (sinc(par * half_l) * sinc(perp * half_l));
        assert_relative_eq!(envelope.re, (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn spdc_support_bound() {
        let jsa = SpdcJsa::new(pump());
        let (lo, hi) = jsa.sum_support();
        for &(s, i) in &[(lo / 2.0 - 0.001, lo / 2.0), (hi / 2.0 + 0.001, hi / 2.0)] {
            assert!(jsa.eval_real(s, i).norm() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn prop_schwarz_reflection(
            rs in 1.5f64..2.1, is_ in -0.1f64..0.1,
            ri in 1.5f64..2.1, ii in -0.1f64..0.1,
        ) {
            let jsa = SpdcJsa::new(pump());
            let zs = c64(rs, is_);
            let zi = c64(ri, ii);
            let direct = jsa.amplitude(zs.conj(), zi.conj());
            let reflected = jsa.amplitude(zs, zi).conj();
            let scale = direct.norm().max(1e-30);
            prop_assert!((direct - reflected).norm() / scale < 1e-12);
        }

        #[test]
        fn prop_modulus_swap_symmetry(
            ws in 1.5f64..2.1, wi in 1.5f64..2.1,
        ) {
            // Equal collection angles make the modulus symmetric.
            let jsa = SpdcJsa::new(pump());
            let a = jsa.eval_real(ws, wi).norm();
            let b = jsa.eval_real(wi, ws).norm();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-30));
        }
    }
}
