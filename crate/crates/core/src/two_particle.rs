//! Two-excitation propagators built from the single-polariton poles.
//!
//! * [`bipolariton_green`] — the bipolariton coherence `GG(w)`, with poles at
//!   all pairwise sums of polariton frequencies,
//! * [`excited_coherence_green`] — the excited-state polariton-polariton
//!   coherence `GGbar(w)`, with poles at pairwise differences (always strictly
//!   below the real axis, so it is smooth for real arguments).
//!
//! Each pole formula is paired with an independent convolution oracle that
//! evaluates the defining frequency integral by adaptive quadrature over the
//! whole real line. The structural-conjugate variants (`*_cc`) swap the
//! expansion coefficients for their conjugate partners and mirror the poles;
//! they enter the conjugated half of the scattering amplitudes and vanish for
//! a vacuum cavity.

use num_complex::Complex;

use crate::float::{czero, Float};
use crate::greens::{GreensError, PoleDecomposition, POLE_PROXIMITY_TOL};
use crate::quad::{integrate_real_line, QuadError, QuadResult, QuadSettings};

/// Bipolariton coherence `GG(w) = -i sum_{a,b} u_a u_b / (w - w_a - w_b)`.
pub fn bipolariton_green<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
) -> Result<Complex<T>, GreensError> {
    double_pole_sum(
        z,
        &dec.poles(),
        &dec.coefficients(),
        &dec.poles(),
        &dec.coefficients(),
        Sign::Minus,
        Combine::Sum,
    )
}

/// Excited-state coherence `GGbar(w) = i sum_{a,b} u_a u*_b / (w - w_a + w*_b)`.
pub fn excited_coherence_green<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
) -> Result<Complex<T>, GreensError> {
    double_pole_sum(
        z,
        &dec.poles(),
        &dec.coefficients(),
        &dec.conj_poles(),
        &dec.conj_coefficients(),
        Sign::Plus,
        Combine::Difference,
    )
}

/// Structural conjugate of [`bipolariton_green`]:
/// `+i sum u*_a u*_b / (w - w*_a - w*_b)`. Zero for a vacuum cavity.
pub fn bipolariton_green_cc<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
) -> Result<Complex<T>, GreensError> {
    double_pole_sum(
        z,
        &dec.conj_poles(),
        &dec.conj_coefficients(),
        &dec.conj_poles(),
        &dec.conj_coefficients(),
        Sign::Plus,
        Combine::Sum,
    )
}

/// Structural conjugate of [`excited_coherence_green`]:
/// `-i sum u*_a u_b / (w - w*_a + w_b)`. Zero for a vacuum cavity.
pub fn excited_coherence_green_cc<T: Float>(
    z: Complex<T>,
    dec: &PoleDecomposition<T>,
) -> Result<Complex<T>, GreensError> {
    double_pole_sum(
        z,
        &dec.conj_poles(),
        &dec.conj_coefficients(),
        &dec.poles(),
        &dec.coefficients(),
        Sign::Minus,
        Combine::Difference,
    )
}

enum Sign {
    Plus,
    Minus,
}

enum Combine {
    /// Pole at `w_a + w_b`.
    Sum,
    /// Pole at `w_a - w_b`.
    Difference,
}

fn double_pole_sum<T: Float>(
    z: Complex<T>,
    poles_a: &[Complex<T>; 2],
    coeffs_a: &[Complex<T>; 2],
    poles_b: &[Complex<T>; 2],
    coeffs_b: &[Complex<T>; 2],
    sign: Sign,
    combine: Combine,
) -> Result<Complex<T>, GreensError> {
    let mut acc = czero::<T>();
    for (wa, ua) in poles_a.iter().zip(coeffs_a.iter()) {
        for (wb, ub) in poles_b.iter().zip(coeffs_b.iter()) {
            let weight = *ua * *ub;
            if weight.norm() == T::zero() {
                continue;
            }
            let pole = match combine {
                Combine::Sum => *wa + *wb,
                Combine::Difference => *wa - *wb,
            };
            let d = z - pole;
            if d.norm() <= T::lit(POLE_PROXIMITY_TOL) {
                return Err(GreensError::Singularity {
                    distance: d.norm().to_f64_lossy(),
                });
            }
            acc += weight / d;
        }
    }
    let i = Complex::new(T::zero(), T::one());
    Ok(match sign {
        Sign::Plus => i * acc,
        Sign::Minus => -i * acc,
    })
}

/// Errors from the convolution oracles.
#[derive(Debug, thiserror::Error)]
pub enum OracleError<T: Float> {
    #[error("convolution integrand is singular on the real axis (smallest linewidth {0:.3e} eV)")]
    SingularConvolution(T),
    #[error(transparent)]
    Quadrature(#[from] QuadError<T>),
    #[error(transparent)]
    Greens(#[from] GreensError),
}

/// Integration window for the convolution oracles: the finite core spans
/// `scale` times the largest spectral scale of the decomposition, centered
/// between the poles; mapped tails cover the rest of the line exactly.
pub fn oracle_window<T: Float>(dec: &PoleDecomposition<T>, scale: T) -> (T, T) {
    let gamma_o_like = dec.pole_plus.im.abs().max(dec.pole_minus.im.abs());
    let split = (dec.pole_plus - dec.pole_minus).norm();
    let width = scale * gamma_o_like.max(split).max(dec.gamma_c);
    let center = (dec.pole_plus.re + dec.pole_minus.re) * T::lit(0.5);
    (center, width)
}

fn check_linewidths<T: Float>(dec: &PoleDecomposition<T>) -> Result<(), OracleError<T>> {
    let min = dec.min_linewidth();
    if min <= T::lit(1.0e-14) {
        return Err(OracleError::SingularConvolution(min));
    }
    Ok(())
}

/// Convolution oracle for the bipolariton coherence:
/// `GG(w) = 2 pi \int dw' G(w - w') G(w')`.
pub fn bipolariton_green_by_convolution<T: Float>(
    omega: T,
    dec: &PoleDecomposition<T>,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, OracleError<T>> {
    check_linewidths(dec)?;
    let (center, width) = oracle_window(dec, T::lit(200.0));
    let w = Complex::new(omega, T::zero());
    let two_pi = T::lit(2.0) * T::PI();
    let integrand = |x: T| {
        let xp = Complex::new(x, T::zero());
        let a = dec.green(w - xp).unwrap_or_else(|_| czero());
        let b = dec.green(xp).unwrap_or_else(|_| czero());
        a * b
    };
    let mut r = integrate_real_line(integrand, center, width, settings)?;
    r.value = r.value * Complex::new(two_pi, T::zero());
    r.error = r.error * two_pi;
    Ok(r)
}

/// Convolution oracle for the excited-state coherence:
/// `GGbar(w) = 2 pi \int dw' G(w + w') G*(w')`.
pub fn excited_coherence_green_by_convolution<T: Float>(
    omega: T,
    dec: &PoleDecomposition<T>,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, OracleError<T>> {
    check_linewidths(dec)?;
    let (center, width) = oracle_window(dec, T::lit(200.0));
    let w = Complex::new(omega, T::zero());
    let two_pi = T::lit(2.0) * T::PI();
    let integrand = |x: T| {
        let xp = Complex::new(x, T::zero());
        let a = dec.green(w + xp).unwrap_or_else(|_| czero());
        let b = dec.green_conj(xp).unwrap_or_else(|_| czero());
        a * b
    };
    let mut r = integrate_real_line(integrand, center, width, settings)?;
    r.value = r.value * Complex::new(two_pi, T::zero());
    r.error = r.error * two_pi;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TcParams;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(coupling_over_omega_o: f64, n_bar: f64) -> TcParams<f64> {
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

    fn settings() -> QuadSettings<f64> {
        QuadSettings::new(1e-10, 4000)
    }

    #[test]
    fn empty_cavity_single_pole() {
        // u_+ = 1, u_- = 0, single cavity pole: GG(w) = -i / (w - 2 w_c).
        let dec = PoleDecomposition::from_params(&params(0.0, 0.0)).unwrap();
        let z = c64(3.70, 0.0);
        let gg = bipolariton_green(z, &dec).unwrap();
        // The second pole still carries u_- = 0, so only one term survives.
        let expected = -c64(0.0, 1.0) / (z - 2.0 * c64(1.81, -0.0125));
        assert!((gg - expected).norm() < 1e-14);

        // At w = 2 w_c the value reduces to -1 / (2 gamma_c).
        let at_res = bipolariton_green(c64(3.62, 0.0), &dec).unwrap();
        assert!((at_res - c64(-1.0 / 0.025, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn excited_coherence_trivial_cases() {
        let dec0 = PoleDecomposition::from_params(&params(0.0065, 0.0)).unwrap();
        for &w in &[0.0, 0.01, -0.03] {
            assert_eq!(excited_coherence_green(c64(w, 0.0), &dec0).unwrap(), c64(0.0, 0.0));
        }

        // n_bar = 1, no coupling: single cavity pole with u = 2, u* = 1:
        // GGbar(0) = i * 2 / (0 - w_c + w_c*) = i 2/(2 i gamma_c) = 1/gamma_c.
        let dec1 = PoleDecomposition::from_params(&params(0.0, 1.0)).unwrap();
        let v = excited_coherence_green(c64(0.0, 0.0), &dec1).unwrap();
        let gamma_c = 0.0625;
        assert!((v - c64(1.0 / gamma_c, 0.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn cc_variants_vanish_in_vacuum() {
        let dec = PoleDecomposition::from_params(&params(0.0065, 0.0)).unwrap();
        assert_eq!(bipolariton_green_cc(c64(3.6, 0.1), &dec).unwrap(), c64(0.0, 0.0));
        assert_eq!(excited_coherence_green_cc(c64(0.2, 0.0), &dec).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn oracle_matches_pole_form_empty_cavity() {
        let dec = PoleDecomposition::from_params(&params(0.0, 0.0)).unwrap();
        let r = bipolariton_green_by_convolution(3.62, &dec, &settings()).unwrap();
        let exact = bipolariton_green(c64(3.62, 0.0), &dec).unwrap();
        assert!(
            (r.value - exact).norm() / exact.norm() < 1e-6,
            "quad {} vs pole {}",
            r.value,
            exact
        );
    }

    #[test]
    fn oracle_matches_pole_form_strong_coupling() {
        let dec = PoleDecomposition::from_params(&params(0.0065, 0.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = rng.gen_range(3.4..3.9);
            let quad = bipolariton_green_by_convolution(w, &dec, &settings()).unwrap();
            let pole = bipolariton_green(c64(w, 0.0), &dec).unwrap();
            let rel = (quad.value - pole).norm() / pole.norm();
            assert!(rel < 1e-6, "GG rel {rel} at {w}");
        }
    }

    #[test]
    fn excited_oracle_matches_pole_form_occupied() {
        let dec = PoleDecomposition::from_params(&params(0.0065, 1.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w = rng.gen_range(-0.2..0.2);
            let quad = excited_coherence_green_by_convolution(w, &dec, &settings()).unwrap();
            let pole = excited_coherence_green(c64(w, 0.0), &dec).unwrap();
            let rel = (quad.value - pole).norm() / pole.norm();
            assert!(rel < 1e-6, "GGbar rel {rel} at {w}");
        }

        // And the simple closed-form point: n_bar = 1, no coupling, w = 0.
        let dec_simple = PoleDecomposition::from_params(&params(0.0, 1.0)).unwrap();
        let q = excited_coherence_green_by_convolution(0.0, &dec_simple, &settings()).unwrap();
        assert!((q.value - c64(1.0 / 0.0625, 0.0)).norm() < 1e-6 / 0.0625);
    }

    #[test]
    fn zero_linewidth_rejected() {
        let mut p = params(0.0, 0.0);
        p.kappa = 0.0;
        p.gamma_o = 0.0;
        let dec = PoleDecomposition::from_params(&p).unwrap();
        match bipolariton_green_by_convolution(3.62, &dec, &settings()) {
            Err(OracleError::SingularConvolution(_)) => {}
            other => panic!("expected singular-convolution error, got {other:?}"),
        }
    }

    #[test]
    fn three_poles_located() {
        // Probe |1/GG| on a fine complex-plane grid: exactly three clusters of
        // near-zeros, at the pairwise pole sums.
        let dec = PoleDecomposition::from_params(&params(0.0065, 0.0)).unwrap();
        let expected = [
            dec.pole_plus * 2.0,
            dec.pole_plus + dec.pole_minus,
            dec.pole_minus * 2.0,
        ];
        let mut found: Vec<Complex64> = Vec::new();
        let (re_lo, re_hi) = (3.56, 3.68);
        let (im_lo, im_hi) = (-0.05, -0.015);
        let n = 300;
        for i in 0..n {
            for j in 0..n {
                let z = c64(
                    re_lo + (re_hi - re_lo) * i as f64 / (n - 1) as f64,
                    im_lo + (im_hi - im_lo) * j as f64 / (n - 1) as f64,
                );
                if let Ok(g) = bipolariton_green(z, &dec) {
                    if g.norm() > 500.0 && !found.iter().any(|p| (p - z).norm() < 2e-3) {
                        found.push(z);
                    }
                }
            }
        }
        assert_eq!(found.len(), 3, "clusters at {found:?}");
        for e in expected {
            assert!(
                found.iter().any(|p| (p - e).norm() < 2e-3),
                "pole {e} not located among {found:?}"
            );
        }
    }

    #[test]
    fn asymptotic_weight() {
        // w GG(w) -> -i (n_bar + 1)^2 on the real axis.
        for n_bar in [0.0, 1.0] {
            let dec = PoleDecomposition::from_params(&params(0.0065, n_bar)).unwrap();
            let w = 1e7;
            let gg = bipolariton_green(c64(w, 0.0), &dec).unwrap();
            let lim = c64(0.0, -(n_bar + 1.0) * (n_bar + 1.0));
            assert!((c64(w, 0.0) * gg - lim).norm() < 1e-4, "n_bar {n_bar}");
        }
    }
}
