//! Single-polariton Green functions of the Tavis-Cummings cavity.
//!
//! The retarded propagator of the cavity mode hybridized with N identical
//! emitters has two complex poles (upper/lower polariton). Two equivalent
//! evaluation routes are provided and cross-checked in the tests:
//!
//! * the pole expansion `G(w) = sum_a u_a / (2 pi (w - w_a))` built from a
//!   [`PoleDecomposition`], and
//! * the closed-form rational solution of the equations of motion
//!   ([`green_closed`]).
//!
//! The conjugate-partner function `G*` is *not* the numerical conjugate of
//! `G`: it propagates the excited-state initial condition and carries the
//! steady-state population `n_bar` where `G` carries `n_bar + 1`. It vanishes
//! identically for a cavity in the vacuum state.

use num_complex::Complex;
use thiserror::Error;

use crate::config::TcParams;
use crate::float::{cre, Float};

#[derive(Debug, Error, PartialEq)]
pub enum GreensError {
    #[error("polariton poles are degenerate (|w+ - w-| = {separation:.3e} eV); perturb the coupling")]
    DegenerateSpectrum { separation: f64 },
    #[error("evaluation at a pole of the Green function (distance {distance:.3e} eV)")]
    Singularity { distance: f64 },
    #[error("Green function vanishes at this frequency; correction factor undefined")]
    ZeroGreen,
}

/// Distance below which two poles count as degenerate (eV).
pub const DEGENERACY_TOL: f64 = 1.0e-12;
/// Distance below which an evaluation point counts as sitting on a pole (eV).
pub const POLE_PROXIMITY_TOL: f64 = 1.0e-15;

/// Complex polariton poles and expansion coefficients: the fingerprint of the
/// single-particle Green functions.
///
/// `u_conj_*` are the coefficients of the conjugate-partner expansion; they
/// satisfy `u_conj_plus + u_conj_minus = n_bar` and are not the numerical
/// conjugates of `u_plus` / `u_minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleDecomposition<T: Float> {
    pub pole_plus: Complex<T>,
    pub pole_minus: Complex<T>,
    pub u_plus: Complex<T>,
    pub u_minus: Complex<T>,
    pub u_conj_plus: Complex<T>,
    pub u_conj_minus: Complex<T>,
    /// Dressed cavity dephasing rate used for the poles (eV).
    pub gamma_c: T,
}

/// Radiative cavity dephasing rate `kappa * (1/2 + n_bar (n_bar + 1))`.
#[inline]
pub fn cavity_dephasing_rate<T: Float>(kappa: T, n_bar: T) -> T {
    kappa * (T::lit(0.5) + n_bar * (n_bar + T::one()))
}

/// Complex cavity frequency `omega_c - i gamma_c` with the dressed dephasing.
#[inline]
pub fn complex_cavity_frequency<T: Float>(params: &TcParams<T>) -> Complex<T> {
    Complex::new(
        params.omega_c,
        -cavity_dephasing_rate(params.kappa, params.n_bar),
    )
}

/// Complex emitter frequency `omega_o - i gamma_o`.
#[inline]
pub fn complex_emitter_frequency<T: Float>(params: &TcParams<T>) -> Complex<T> {
    Complex::new(params.omega_o, -params.gamma_o)
}

/// Principal square root with a deterministic branch: nonnegative real part,
/// and nonnegative imaginary part when the real part is zero. The second rule
/// removes the signed-zero ambiguity of the standard library branch cut.
#[inline]
fn principal_sqrt<T: Float>(z: Complex<T>) -> Complex<T> {
    let s = z.sqrt();
    if s.re < T::zero() || (s.re == T::zero() && s.im < T::zero()) {
        -s
    } else {
        s
    }
}

/// Upper and lower polariton poles
/// `w_pm = (w_c + w_o)/2 +- sqrt((w_c - w_o)^2/4 - lambda^2 N sigma_z)`.
///
/// The "+" branch takes the principal square root as defined above; below the
/// strong-coupling threshold the two branches share their real part and the
/// labels only fix the bookkeeping.
pub fn polariton_poles<T: Float>(params: &TcParams<T>) -> (Complex<T>, Complex<T>) {
    let wc = complex_cavity_frequency(params);
    let wo = complex_emitter_frequency(params);
    let half = T::lit(0.5);
    let mid = (wc + wo) * cre(half);
    let d = (wc - wo) * cre(half);
    let disc = d * d - cre(params.coupling_sq() * params.sigma_z);
    let root = principal_sqrt(disc);
    (mid + root, mid - root)
}

/// Residue coefficients of the pole expansion,
/// `u_pm = +-[(w_pm - w_o)(n_bar + 1) + s] / (w_+ - w_-)` and the
/// conjugate-partner coefficients with `n_bar` and conjugated frequencies,
/// where `s` is the combined steady-state coherence `lambda N <sigma a>`.
pub fn expansion_coefficients<T: Float>(
    params: &TcParams<T>,
    poles: (Complex<T>, Complex<T>),
) -> Result<PoleDecomposition<T>, GreensError> {
    let (wp, wm) = poles;
    let split = wp - wm;
    if split.norm() < T::lit(DEGENERACY_TOL) {
        return Err(GreensError::DegenerateSpectrum {
            separation: split.norm().to_f64_lossy(),
        });
    }
    let wo = complex_emitter_frequency(params);
    let n1 = cre(params.n_bar + T::one());
    let s = params.sigma_a;
    let u_plus = ((wp - wo) * n1 + s) / split;
    let u_minus = -((wm - wo) * n1 + s) / split;

    let split_c = wp.conj() - wm.conj();
    let n = cre(params.n_bar);
    let sc = s.conj();
    let u_conj_plus = ((wp.conj() - wo.conj()) * n + sc) / split_c;
    let u_conj_minus = -((wm.conj() - wo.conj()) * n + sc) / split_c;

    Ok(PoleDecomposition {
        pole_plus: wp,
        pole_minus: wm,
        u_plus,
        u_minus,
        u_conj_plus,
        u_conj_minus,
        gamma_c: cavity_dephasing_rate(params.kappa, params.n_bar),
    })
}

impl<T: Float> PoleDecomposition<T> {
    /// Build poles and coefficients from validated parameters.
    pub fn from_params(params: &TcParams<T>) -> Result<Self, GreensError> {
        expansion_coefficients(params, polariton_poles(params))
    }

    #[inline]
    pub fn poles(&self) -> [Complex<T>; 2] {
        [self.pole_plus, self.pole_minus]
    }

    #[inline]
    pub fn coefficients(&self) -> [Complex<T>; 2] {
        [self.u_plus, self.u_minus]
    }

    #[inline]
    pub fn conj_poles(&self) -> [Complex<T>; 2] {
        [self.pole_plus.conj(), self.pole_minus.conj()]
    }

    #[inline]
    pub fn conj_coefficients(&self) -> [Complex<T>; 2] {
        [self.u_conj_plus, self.u_conj_minus]
    }

    /// Smallest distance from the real axis to any pole (eV). Zero means the
    /// real-axis convolutions are singular.
    pub fn min_linewidth(&self) -> T {
        self.pole_plus.im.abs().min(self.pole_minus.im.abs())
    }

    /// Pole expansion of the retarded Green function,
    /// `G(z) = sum_a u_a / (2 pi (z - w_a))`. Accepts complex arguments.
    pub fn green(&self, z: Complex<T>) -> Result<Complex<T>, GreensError> {
        pole_sum(z, &self.poles(), &self.coefficients())
    }

    /// Conjugate-partner expansion with coefficients `u*_a` and poles `w*_a`.
    /// Identically zero for `n_bar = 0` with no steady-state coherence.
    pub fn green_conj(&self, z: Complex<T>) -> Result<Complex<T>, GreensError> {
        pole_sum(z, &self.conj_poles(), &self.conj_coefficients())
    }
}

fn pole_sum<T: Float>(
    z: Complex<T>,
    poles: &[Complex<T>; 2],
    coeffs: &[Complex<T>; 2],
) -> Result<Complex<T>, GreensError> {
    let two_pi = cre(T::lit(2.0) * T::PI());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (w, u) in poles.iter().zip(coeffs.iter()) {
        // A vanished residue contributes nothing even at the formal pole
        // location; skipping it keeps e.g. the vacuum conjugate function
        // evaluable everywhere.
        if u.norm() == T::zero() {
            continue;
        }
        let d = z - *w;
        if d.norm() <= T::lit(POLE_PROXIMITY_TOL) {
            return Err(GreensError::Singularity {
                distance: d.norm().to_f64_lossy(),
            });
        }
        acc += *u / d;
    }
    Ok(acc / two_pi)
}

/// Closed-form rational Green function
/// `G(z) = [(z - w_o)(n_bar + 1) + s] / (2 pi [(z - w_c)(z - w_o) + lambda^2 N sigma_z])`.
/// Serves as the independent oracle for the pole expansion.
pub fn green_closed<T: Float>(
    z: Complex<T>,
    params: &TcParams<T>,
) -> Result<Complex<T>, GreensError> {
    let wc = complex_cavity_frequency(params);
    let wo = complex_emitter_frequency(params);
    let numer = (z - wo) * cre(params.n_bar + T::one()) + params.sigma_a;
    let denom = (z - wc) * (z - wo) + cre(params.coupling_sq() * params.sigma_z);
    rational(numer, denom)
}

/// Closed-form conjugate-partner Green function (population `n_bar`,
/// conjugated complex frequencies).
pub fn green_conj_closed<T: Float>(
    z: Complex<T>,
    params: &TcParams<T>,
) -> Result<Complex<T>, GreensError> {
    let wc = complex_cavity_frequency(params).conj();
    let wo = complex_emitter_frequency(params).conj();
    let numer = (z - wo) * cre(params.n_bar) + params.sigma_a.conj();
    let denom = (z - wc) * (z - wo) + cre(params.coupling_sq() * params.sigma_z);
    rational(numer, denom)
}

fn rational<T: Float>(numer: Complex<T>, denom: Complex<T>) -> Result<Complex<T>, GreensError> {
    if denom.norm() <= T::lit(POLE_PROXIMITY_TOL) {
        return Err(GreensError::Singularity {
            distance: denom.norm().to_f64_lossy(),
        });
    }
    Ok(numer / (denom * cre(T::lit(2.0) * T::PI())))
}

/// Radiative-correction factor `1 + 4 pi i kappa G*(w)` applied to `G` inside
/// the coherent scattering amplitude when the configuration requests it.
/// Equal to one whenever the conjugate-partner function vanishes.
pub fn delta_sigma_factor<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
    kappa: T,
) -> Result<Complex<T>, GreensError> {
    let gc = dec.green_conj(z)?;
    let four_pi = T::lit(4.0) * T::PI();
    Ok(Complex::new(T::one(), T::zero()) + Complex::new(T::zero(), four_pi * kappa) * gc)
}

/// Structural conjugate of [`delta_sigma_factor`]: `1 - 4 pi i kappa G(w)`,
/// applied to the conjugate-partner function in the same brace.
pub fn delta_sigma_factor_conj<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
    kappa: T,
) -> Result<Complex<T>, GreensError> {
    let g = dec.green(z)?;
    let four_pi = T::lit(4.0) * T::PI();
    Ok(Complex::new(T::one(), T::zero()) - Complex::new(T::zero(), four_pi * kappa) * g)
}

/// One row of a polariton dispersion sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint<T: Float> {
    pub coupling_over_omega_o: T,
    pub re_omega_plus: T,
    pub re_omega_minus: T,
    pub gamma_plus: T,
    pub gamma_minus: T,
}

/// Sweep the normalized cooperative coupling and record both polariton
/// branches. `couplings` are values of `lambda sqrt(N) / omega_o`.
pub fn dispersion_sweep<T: Float>(
    params: &TcParams<T>,
    couplings: &[T],
) -> Vec<DispersionPoint<T>> {
    couplings
        .iter()
        .map(|&r| {
            let p = params.with_coupling(r * params.omega_o);
            let (wp, wm) = polariton_poles(&p);
            DispersionPoint {
                coupling_over_omega_o: r,
                re_omega_plus: wp.re,
                re_omega_minus: wm.re,
                gamma_plus: -wp.im,
                gamma_minus: -wm.im,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn baseline_params(coupling_over_omega_o: f64, n_bar: f64) -> TcParams<f64> {
        TcParams {
            omega_o: 1.81,
            omega_c: 1.81,
            gamma_o: 0.020,
            kappa: 0.025,
            coupling: coupling_over_omega_o * 1.81,
            n_bar,
            sigma_z: -1.0,
            sigma_a: c64(0.0, 0.0),
            include_delta_sigma: false,
        }
    }

    #[test]
    fn dephasing_rate_closed_form() {
        assert_eq!(cavity_dephasing_rate(0.025, 0.0), 0.0125);
        assert_relative_eq!(cavity_dephasing_rate(0.025, 1.0), 0.0625, max_relative = 1e-15);
        assert_relative_eq!(cavity_dephasing_rate(0.025, 2.0), 0.1625, max_relative = 1e-15);
    }

    #[test]
    fn decoupled_poles_are_bare_frequencies() {
        let mut p = baseline_params(0.0, 0.0);
        p.omega_c = 1.90;
        let (wp, wm) = polariton_poles(&p);
        assert_relative_eq!(wp.re, 1.90, max_relative = 1e-14);
        assert_relative_eq!(wp.im, -0.0125, max_relative = 1e-14);
        assert_relative_eq!(wm.re, 1.81, max_relative = 1e-14);
        assert_relative_eq!(wm.im, -0.020, max_relative = 1e-14);
    }

    #[test]
    fn strong_coupling_rabi_split() {
        let p = baseline_params(0.0065, 0.0);
        let (wp, wm) = polariton_poles(&p);
        // Expected from the closed form: mid = 1.81, split = sqrt(c^2 - d^2)
        let c = 0.0065 * 1.81;
        let d = (0.020 - 0.0125) / 2.0;
        let split = (c * c - d * d).sqrt();
        assert_relative_eq!(wp.re, 1.81 + split, max_relative = 1e-12);
        assert_relative_eq!(wm.re, 1.81 - split, max_relative = 1e-12);
        assert!((wp.re - 1.821).abs() < 1e-3);
        assert!((wm.re - 1.799).abs() < 1e-3);
        assert_relative_eq!(-wp.im, 0.01625, max_relative = 1e-12);
        assert_relative_eq!(-wm.im, 0.01625, max_relative = 1e-12);
    }

    #[test]
    fn splitting_threshold() {
        // With sigma_z = -1 and omega_c = omega_o the real parts split exactly
        // when the coupling exceeds |gamma_c - gamma_o| / 2.
        let threshold = (0.020 - 0.0125) / 2.0 / 1.81;
        for &r in &[0.0005, 0.001, 0.002] {
            let (wp, wm) = polariton_poles(&baseline_params(r, 0.0));
            if r < threshold {
                assert!((wp.re - wm.re).abs() < 1e-12, "no split below threshold, r={r}");
            }
        }
        for &r in &[0.0021, 0.0045, 0.0065] {
            let (wp, wm) = polariton_poles(&baseline_params(r, 0.0));
            assert!(wp.re > wm.re, "split above threshold, r={r}");
        }
    }

    #[test]
    fn decoupled_coefficients() {
        let mut p = baseline_params(0.0, 0.0);
        p.omega_c = 1.90;
        let dec = PoleDecomposition::from_params(&p).unwrap();
        assert!((dec.u_plus - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(dec.u_minus.norm() < 1e-14);
        assert!(dec.u_conj_plus.norm() < 1e-14);
        assert!(dec.u_conj_minus.norm() < 1e-14);
    }

    #[test]
    fn residue_sums() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::SeedableRng;
        for _ in 0..200 {
            let p = TcParams::<f64> {
                omega_o: rng.gen_range(0.5..3.0),
                omega_c: rng.gen_range(0.5..3.0),
                gamma_o: rng.gen_range(0.0..0.1),
                kappa: rng.gen_range(1e-4..0.1),
                coupling: rng.gen_range(0.0..0.05),
                n_bar: rng.gen_range(0.0..3.0),
                sigma_z: rng.gen_range(-1.0..1.0),
                sigma_a: c64(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01)),
                include_delta_sigma: false,
            };
            let dec = match PoleDecomposition::from_params(&p) {
                Ok(d) => d,
                Err(GreensError::DegenerateSpectrum { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let s = dec.u_plus + dec.u_minus;
            assert!((s - c64(p.n_bar + 1.0, 0.0)).norm() < 1e-12, "u sum {s}");
            let sc = dec.u_conj_plus + dec.u_conj_minus;
            assert!((sc - c64(p.n_bar, 0.0)).norm() < 1e-12, "u* sum {sc}");
        }
    }

    #[test]
    fn degenerate_poles_rejected() {
        // Exceptional point: omega_c = omega_o, gamma tuned so the
        // discriminant vanishes at this coupling.
        let mut p = baseline_params(0.0, 0.0);
        p.gamma_o = 0.0125;
        p.coupling = 0.0;
        match PoleDecomposition::from_params(&p) {
            Err(GreensError::DegenerateSpectrum { .. }) => {}
            other => panic!("expected degenerate-spectrum error, got {other:?}"),
        }
    }

    #[test]
    fn empty_cavity_green_at_resonance() {
        let p = baseline_params(0.0, 0.0);
        let dec = PoleDecomposition::from_params(&p).unwrap();
        let g = dec.green(c64(1.81, 0.0)).unwrap();
        // Single-pole reduction: G(omega_c) = i / (2 pi gamma_c)
        let expected = c64(0.0, 1.0 / (2.0 * std::f64::consts::PI * 0.0125));
        assert!((g - expected).norm() / expected.norm() < 1e-12);
    }

    #[test]
    fn conj_green_vanishes_in_vacuum() {
        let dec = PoleDecomposition::from_params(&baseline_params(0.0065, 0.0)).unwrap();
        for &w in &[1.7, 1.81, 1.9, 2.5] {
            assert_eq!(dec.green_conj(c64(w, 0.0)).unwrap(), c64(0.0, 0.0));
        }
    }

    #[test]
    fn conj_green_single_pole_with_population() {
        let p = baseline_params(0.0, 1.0);
        let dec = PoleDecomposition::from_params(&p).unwrap();
        let w = 1.83;
        let gc = dec.green_conj(c64(w, 0.0)).unwrap();
        let gamma_c = cavity_dephasing_rate(0.025, 1.0);
        let expected = 1.0 / (2.0 * std::f64::consts::PI * c64(w - 1.81, -gamma_c));
        assert!((gc - expected).norm() / expected.norm() < 1e-12, "{gc} vs {expected}");
    }

    #[test]
    fn pole_sum_matches_closed_form() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n_bar in [0.0, 1.0, 2.0] {
            let p = baseline_params(0.0065, n_bar);
            let dec = PoleDecomposition::from_params(&p).unwrap();
            for _ in 0..100 {
                let z = c64(rng.gen_range(1.5..2.1), rng.gen_range(-0.3..0.3));
                let a = dec.green(z).unwrap();
                let b = green_closed(z, &p).unwrap();
                assert!((a - b).norm() / b.norm().max(1e-300) < 1e-10, "G at {z}");
                let ac = dec.green_conj(z).unwrap();
                let bc = green_conj_closed(z, &p).unwrap();
                let scale = bc.norm().max(1e-12);
                assert!((ac - bc).norm() / scale < 1e-10, "G* at {z}");
            }
        }
    }

    #[test]
    fn closed_form_singularity_reported() {
        let p = baseline_params(0.0065, 0.0);
        let dec = PoleDecomposition::from_params(&p).unwrap();
        assert!(matches!(
            dec.green(dec.pole_plus),
            Err(GreensError::Singularity { .. })
        ));
        assert!(matches!(
            green_closed(dec.pole_plus, &p),
            Err(GreensError::Singularity { .. })
        ));
    }

    #[test]
    fn asymptotic_decay() {
        let p = baseline_params(0.0065, 1.0);
        let dec = PoleDecomposition::from_params(&p).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for &w in &[1e3, 1e5, 1e7] {
            let g = dec.green(c64(w, 0.0)).unwrap();
            let dev = (c64(two_pi * w, 0.0) * g - c64(p.n_bar + 1.0, 0.0)).norm();
            assert!(dev < 10.0 / w, "2 pi w G -> n_bar + 1, dev {dev} at {w}");
        }
    }

    #[test]
    fn delta_sigma_factor_trivial_cases() {
        let dec = PoleDecomposition::from_params(&baseline_params(0.0065, 0.0)).unwrap();
        let f = delta_sigma_factor(c64(1.81, 0.0), &dec, 0.025).unwrap();
        assert_eq!(f, c64(1.0, 0.0));

        let dec1 = PoleDecomposition::from_params(&baseline_params(0.0065, 1.0)).unwrap();
        let f0 = delta_sigma_factor(c64(1.81, 0.0), &dec1, 0.0).unwrap();
        assert_eq!(f0, c64(1.0, 0.0));
        // Occupied cavity at resonance: factor = 1 + 4 pi i kappa G*(w_c).
        let gc = dec1.green_conj(c64(1.81, 0.0)).unwrap();
        let f1 = delta_sigma_factor(c64(1.81, 0.0), &dec1, 0.025).unwrap();
        let expected = c64(1.0, 0.0) + c64(0.0, 4.0 * std::f64::consts::PI * 0.025) * gc;
        assert!((f1 - expected).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn prop_residue_sums_and_path_equivalence(
            omega_o in 0.5f64..3.0,
            detune in -0.2f64..0.2,
            gamma_o in 1e-4f64..0.1,
            kappa in 1e-4f64..0.1,
            coupling in 1e-4f64..0.05,
            n_bar in 0.0f64..3.0,
            sigma_z in -1.0f64..1.0,
            re in 1.4f64..2.2,
            im in -0.2f64..0.2,
        ) {
            let p = TcParams::<f64> {
                omega_o,
                omega_c: omega_o + detune,
                gamma_o,
                kappa,
                coupling,
                n_bar,
                sigma_z,
                sigma_a: c64(0.0, 0.0),
                include_delta_sigma: false,
            };
            if let Ok(dec) = PoleDecomposition::from_params(&p) {
                prop_assert!((dec.u_plus + dec.u_minus - c64(n_bar + 1.0, 0.0)).norm() < 1e-12);
                prop_assert!((dec.u_conj_plus + dec.u_conj_minus - c64(n_bar, 0.0)).norm() < 1e-12);
                prop_assert!(dec.pole_plus.im <= 0.0 && dec.pole_minus.im <= 0.0);
                let z = c64(re, im);
                if let (Ok(a), Ok(b)) = (dec.green(z), green_closed(z, &p)) {
                    let scale = b.norm().max(1e-12);
                    prop_assert!((a - b).norm() / scale < 1e-9, "pole {a} vs closed {b}");
                }
            }
        }
    }
}
