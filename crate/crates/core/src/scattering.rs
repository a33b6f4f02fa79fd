//! Biphoton scattering engine: maps an input JSA to the output JSA.
//!
//! The output amplitude splits into a coherent Rayleigh part, which filters
//! each photon independently,
//!
//! ```text
//! F_c = {1 - 2 pi i k [G(w_s) - G*(w_s)]} {1 - 2 pi i k [G(w_i) - G*(w_i)]} F_in
//! ```
//!
//! and an incoherent redistribution part that reshuffles energy between the
//! photons through the two-excitation propagators. The redistribution comes in
//! two interchangeable realizations:
//!
//! * **pole sum** — the contour-integrated sum over polariton poles; needs an
//!   input that evaluates at complex frequencies,
//! * **quadrature** — the defining frequency integral with a principal-value
//!   kernel; works for any input, including measured grids.
//!
//! Every term carries a conjugated partner obtained by swapping each Green
//! function for its conjugate-partner function, negating explicit `i`, and
//! (for the pole sum) conjugating-and-permuting the input-amplitude
//! arguments. For a vacuum cavity every partner vanishes identically.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{GridSpec, ModelConfig};
use crate::float::{cre, czero, ci, Float};
use crate::greens::{
    delta_sigma_factor, delta_sigma_factor_conj, GreensError, PoleDecomposition,
};
use crate::grid::{GridError, JsaGrid};
use crate::input::InputJsa;
use crate::quad::{integrate_segments, QuadError, QuadSettings};
use crate::two_particle::{
    bipolariton_green, bipolariton_green_cc, excited_coherence_green, excited_coherence_green_cc,
};

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error("pole-sum path requires an analytic input source; use the quadrature path for measured grids")]
    NotAnalytic,
    #[error("all polariton linewidths must be positive for scattering (smallest {0:.3e} eV)")]
    SingularSpectrum(f64),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error("quadrature failure at grid point: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("symmetrization requires a square grid with matching axes")]
    SymmetryDomain,
}

impl<T: Float> From<QuadError<T>> for ScatteringError {
    fn from(e: QuadError<T>) -> Self {
        ScatteringError::Quadrature(e.to_string())
    }
}

/// Which realization of the redistribution amplitude to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    PoleSum,
    Quadrature,
}

/// Engine configuration.
#[derive(Debug, Clone, Copy)]
pub struct EngineMode {
    pub path: PathMode,
    /// Use the reduced vacuum formulas when the conjugate-partner
    /// coefficients vanish. Identical results, fewer terms.
    pub vacuum_fast_path: bool,
}

impl EngineMode {
    pub fn pole_sum() -> Self {
        Self {
            path: PathMode::PoleSum,
            vacuum_fast_path: true,
        }
    }

    pub fn quadrature() -> Self {
        Self {
            path: PathMode::Quadrature,
            vacuum_fast_path: true,
        }
    }
}

/// Term toggles for structural experiments. Production uses `default()`.
#[derive(Debug, Clone, Copy)]
pub struct EngineTerms {
    /// Include the input-antisymmetric first term of the pole-sum formula.
    /// It cancels exactly under symmetrization, which the invariant tests
    /// verify by toggling this off.
    pub antisymmetric_term: bool,
}

impl Default for EngineTerms {
    fn default() -> Self {
        Self {
            antisymmetric_term: true,
        }
    }
}

/// Scattering state shared by all per-point evaluations.
pub struct Engine<'a, T: Float, F: InputJsa<T>> {
    pub dec: &'a PoleDecomposition<T>,
    pub kappa: T,
    pub include_delta_sigma: bool,
    pub input: &'a F,
    pub quad: QuadSettings<T>,
    /// Half-width of the redistribution integration window (eV).
    pub window: T,
    pub terms: EngineTerms,
}

/// Default half-width for the redistribution integrals: generous multiple of
/// the largest spectral scale, so kernel tails (decaying at least like
/// `x^-2`) are negligible against the cross-path tolerance.
pub fn default_window<T: Float>(dec: &PoleDecomposition<T>) -> T {
    let gamma = dec
        .pole_plus
        .im
        .abs()
        .max(dec.pole_minus.im.abs())
        .max(dec.gamma_c);
    let split = (dec.pole_plus - dec.pole_minus).norm();
    T::lit(300.0) * gamma.max(split)
}

impl<'a, T: Float, F: InputJsa<T>> Engine<'a, T, F> {
    pub fn new(
        dec: &'a PoleDecomposition<T>,
        kappa: T,
        include_delta_sigma: bool,
        input: &'a F,
        quad: QuadSettings<T>,
    ) -> Self {
        let window = default_window(dec);
        Self {
            dec,
            kappa,
            include_delta_sigma,
            input,
            quad,
            window,
            terms: EngineTerms::default(),
        }
    }

    fn is_vacuum(&self) -> bool {
        self.dec.u_conj_plus.norm() == T::zero() && self.dec.u_conj_minus.norm() == T::zero()
    }

    fn check_spectrum(&self) -> Result<(), ScatteringError> {
        let min = self.dec.min_linewidth();
        if min <= T::lit(1.0e-14) {
            return Err(ScatteringError::SingularSpectrum(min.to_f64_lossy()));
        }
        Ok(())
    }

    /// Single-photon filter brace `1 - 2 pi i k [G(w) - G*(w)]`, optionally
    /// with the radiative-correction factors on each Green function.
    fn brace(&self, w: T) -> Result<Complex<T>, ScatteringError> {
        let z = cre(w);
        let g = self.dec.green(z)?;
        let gc = self.dec.green_conj(z)?;
        let (fg, fgc) = if self.include_delta_sigma {
            (
                delta_sigma_factor(z, self.dec, self.kappa)?,
                delta_sigma_factor_conj(z, self.dec, self.kappa)?,
            )
        } else {
            let one = Complex::new(T::one(), T::zero());
            (one, one)
        };
        let two_pi_k = T::lit(2.0) * T::PI() * self.kappa;
        Ok(Complex::new(T::one(), T::zero())
            - Complex::new(T::zero(), two_pi_k) * (g * fg - gc * fgc))
    }

    /// Coherent Rayleigh amplitude at one grid point.
    pub fn coherent(&self, omega_s: T, omega_i: T) -> Result<Complex<T>, ScatteringError> {
        let f_in = self.input.eval_real(omega_s, omega_i);
        if self.kappa == T::zero() {
            return Ok(f_in);
        }
        Ok(self.brace(omega_s)? * self.brace(omega_i)? * f_in)
    }

    /// Redistribution amplitude via the contour-integrated pole sum, with the
    /// vacuum shortcut enabled.
    pub fn redistribution_pole_sum(
        &self,
        omega_s: T,
        omega_i: T,
    ) -> Result<Complex<T>, ScatteringError> {
        self.pole_sum_impl(omega_s, omega_i, true)
    }

    /// Pole sum with every term assembled even when the conjugate
    /// coefficients vanish. Must agree with the shortcut pointwise; the
    /// vacuum-reduction invariant test compares the two.
    pub fn redistribution_pole_sum_full(
        &self,
        omega_s: T,
        omega_i: T,
    ) -> Result<Complex<T>, ScatteringError> {
        self.pole_sum_impl(omega_s, omega_i, false)
    }

    fn pole_sum_impl(
        &self,
        omega_s: T,
        omega_i: T,
        allow_shortcut: bool,
    ) -> Result<Complex<T>, ScatteringError> {
        if self.kappa == T::zero() {
            return Ok(czero());
        }
        self.check_spectrum()?;
        if !self.input.is_analytic() {
            return Err(ScatteringError::NotAnalytic);
        }

        let dec = self.dec;
        let fin = |a: Complex<T>, b: Complex<T>| -> Result<Complex<T>, ScatteringError> {
            self.input.eval_complex(a, b).ok_or(ScatteringError::NotAnalytic)
        };
        let ws = cre(omega_s);
        let wi = cre(omega_i);
        let big = omega_s + omega_i;
        let bo = cre(big);

        let pi = T::PI();
        let k2 = self.kappa * self.kappa;
        let c_4pi_k2 = cre(T::lit(4.0) * pi * k2);
        let c_4pi2_k2 = cre(T::lit(4.0) * pi * pi * k2);
        let c_8pi2_k2 = cre(T::lit(8.0) * pi * pi * k2);
        let i = ci::<T>();

        let g_ws = dec.green(ws)?;
        let gc_ws = dec.green_conj(ws)?;

        let mut total = czero::<T>();

        if self.terms.antisymmetric_term {
            let g_wi = dec.green(wi)?;
            let gc_wi = dec.green_conj(wi)?;
            let asym = fin(ws, wi)? - fin(wi, ws)?;
            // Direct kernel and its structural conjugate; the permuted input
            // arguments flip the antisymmetric combination's sign.
            let k_direct = gc_ws * g_wi - g_ws * g_wi;
            let k_conj = g_ws * gc_wi - gc_ws * gc_wi;
            total += c_4pi2_k2 * (k_direct - k_conj) * asym;
        }

        let poles = dec.poles();
        let coeffs = dec.coefficients();
        let cpoles = dec.conj_poles();
        let ccoeffs = dec.conj_coefficients();

        if allow_shortcut && self.is_vacuum() {
            // Reduced vacuum form: only the direct single-sum term survives.
            let gg_bo = bipolariton_green(bo, dec)?;
            for (wa, ua) in poles.iter().zip(coeffs.iter()) {
                if ua.norm() == T::zero() {
                    continue;
                }
                let fv = fin(bo - wa, *wa)?;
                let bracket = Complex::new(T::one(), T::zero()) / (*wa - wi) + i * gg_bo;
                total += -c_4pi_k2 * g_ws * *ua * bracket * fv;
            }
            return Ok(total);
        }

        let gg_bo = bipolariton_green(bo, dec)?;
        let gg_cc_bo = bipolariton_green_cc(bo, dec)?;

        // Single sum over the direct coefficients and its conjugated partner.
        for (wa, ua) in poles.iter().zip(coeffs.iter()) {
            if ua.norm() > T::zero() {
                let b1 = g_ws - dec.green_conj(bo - wa)?;
                let b2 = i * excited_coherence_green(wi - wa, dec)? - one_over(*wa - wi)?;
                let piece = b1 * b2 - i * g_ws * gg_bo;
                total += c_4pi_k2 * *ua * piece * fin(bo - wa, *wa)?;
            }
        }
        for (wca, uca) in cpoles.iter().zip(ccoeffs.iter()) {
            if uca.norm() > T::zero() {
                let b1 = gc_ws - dec.green(bo - wca)?;
                let b2 = -i * excited_coherence_green_cc(wi - wca, dec)? - one_over(*wca - wi)?;
                let piece = b1 * b2 + i * gc_ws * gg_cc_bo;
                total += c_4pi_k2 * *uca * piece * fin(*wca, bo - wca)?;
            }
        }

        // Single sum over the conjugate coefficients and its partner.
        for (wca, uca) in cpoles.iter().zip(ccoeffs.iter()) {
            if uca.norm() > T::zero() {
                let b = i * excited_coherence_green(ws - wca, dec)? - one_over(ws - wca)?;
                total += c_4pi_k2 * *uca * dec.green(bo - wca)? * b * fin(*wca, bo - wca)?;
            }
        }
        for (wa, ua) in poles.iter().zip(coeffs.iter()) {
            if ua.norm() > T::zero() {
                let gc_val = dec.green_conj(bo - wa)?;
                if gc_val.norm() > T::zero() {
                    let b = -i * excited_coherence_green_cc(ws - wa, dec)? - one_over(ws - wa)?;
                    total += c_4pi_k2 * *ua * gc_val * b * fin(bo - wa, *wa)?;
                }
            }
        }

        // Double sum and its partner.
        for (wa, ua) in poles.iter().zip(coeffs.iter()) {
            for (wcb, ucb) in cpoles.iter().zip(ccoeffs.iter()) {
                let weight = *ua * *ucb;
                if weight.norm() == T::zero() {
                    continue;
                }
                let shift = *wa - *wcb;
                let b = g_ws - dec.green_conj(ws - shift)?;
                total -= c_8pi2_k2 * weight * b * dec.green(wi + shift)? * fin(ws - shift, wi + shift)?;
            }
        }
        for (wca, uca) in cpoles.iter().zip(ccoeffs.iter()) {
            for (wb, ub) in poles.iter().zip(coeffs.iter()) {
                let weight = *uca * *ub;
                if weight.norm() == T::zero() {
                    continue;
                }
                let shift = *wca - *wb;
                let b = gc_ws - dec.green(ws - shift)?;
                total -= c_8pi2_k2 * weight * b * dec.green_conj(wi + shift)? * fin(wi + shift, ws - shift)?;
            }
        }

        Ok(total)
    }

    /// Redistribution amplitude via the defining frequency integral. Returns
    /// the value and the accumulated quadrature error estimate.
    pub fn redistribution_quadrature(
        &self,
        omega_s: T,
        omega_i: T,
    ) -> Result<(Complex<T>, T), ScatteringError> {
        if self.kappa == T::zero() {
            return Ok((czero(), T::zero()));
        }
        self.check_spectrum()?;
        let dec = self.dec;
        let big = omega_s + omega_i;
        let bo = cre(big);
        let w = self.window;
        let vacuum = self.is_vacuum();
        let prefactor = T::lit(4.0) * T::PI() * self.kappa * self.kappa;

        let g = |x: T| dec.green(cre(x)).expect("poles lie off the real axis");
        let gc = |x: T| dec.green_conj(cre(x)).expect("poles lie off the real axis");

        let phi_a = |x: T| self.input.eval_real(x, big - x) + self.input.eval_real(big - x, x);
        let phi_b = |x: T| {
            self.input.eval_real(omega_s - x, omega_i + x)
                + self.input.eval_real(omega_i + x, omega_s - x)
        };

        let mut value = czero::<T>();
        let mut error = T::zero();

        // Pair-coherence channel: kernel in the total energy only.
        let half = big * T::lit(0.5);
        let k_a = dec.green(cre(omega_s))? * bipolariton_green(bo, dec)?;
        let ia = integrate_segments(
            &|x: T| g(x) * phi_a(x),
            &[(half - w, half), (half, half + w)],
            &self.quad,
        )?;
        value += k_a * ia.value;
        error += k_a.norm() * ia.error;

        // Exchange channel with the principal-value kernel, regularized by
        // subtraction; the excited-coherence piece shares the same pass.
        let g_ws = dec.green(cre(omega_s))?;
        let bf = |x: T| (gc(omega_s - x) - g_ws) * g(omega_i + x) * phi_b(x);
        let bf0 = bf(T::zero());
        let i = ci::<T>();
        let ib = integrate_segments(
            &|x: T| {
                let pv = (bf(x) - bf0) * i / cre(x);
                let ecg = excited_coherence_green(cre(x), dec)
                    .expect("difference poles lie off the real axis");
                pv + (gc(omega_s - x) - g_ws) * ecg * g(omega_i + x) * phi_b(x)
            },
            &[(-w, T::zero()), (T::zero(), w)],
            &self.quad,
        )?;
        value += ib.value;
        error += ib.error;

        if !vacuum {
            let gc_ws = dec.green_conj(cre(omega_s))?;
            let k_a_cc = gc_ws * bipolariton_green_cc(bo, dec)?;
            let ia_cc = integrate_segments(
                &|x: T| gc(x) * phi_a(x),
                &[(half - w, half), (half, half + w)],
                &self.quad,
            )?;
            value += k_a_cc * ia_cc.value;
            error += k_a_cc.norm() * ia_cc.error;

            let bf_cc = |x: T| (g(omega_s - x) - gc_ws) * gc(omega_i + x) * phi_b(x);
            let bf_cc0 = bf_cc(T::zero());
            let ib_cc = integrate_segments(
                &|x: T| {
                    let pv = -(bf_cc(x) - bf_cc0) * i / cre(x);
                    let ecg = excited_coherence_green_cc(cre(x), dec)
                        .expect("difference poles lie off the real axis");
                    pv + (g(omega_s - x) - gc_ws) * ecg * gc(omega_i + x) * phi_b(x)
                },
                &[(-w, T::zero()), (T::zero(), w)],
                &self.quad,
            )?;
            value += ib_cc.value;
            error += ib_cc.error;
        }

        Ok((value * cre(prefactor), error * prefactor))
    }

    /// Redistribution along the engine's configured path.
    pub fn redistribution(
        &self,
        mode: &EngineMode,
        omega_s: T,
        omega_i: T,
    ) -> Result<(Complex<T>, T), ScatteringError> {
        match mode.path {
            PathMode::PoleSum => {
                let v = if mode.vacuum_fast_path {
                    self.redistribution_pole_sum(omega_s, omega_i)?
                } else {
                    self.redistribution_pole_sum_full(omega_s, omega_i)?
                };
                Ok((v, T::zero()))
            }
            PathMode::Quadrature => self.redistribution_quadrature(omega_s, omega_i),
        }
    }
}

fn one_over<T: Float>(d: Complex<T>) -> Result<Complex<T>, ScatteringError> {
    if d.norm() <= T::lit(1.0e-15) {
        return Err(ScatteringError::Greens(GreensError::Singularity {
            distance: d.norm().to_f64_lossy(),
        }));
    }
    Ok(Complex::new(T::one(), T::zero()) / d)
}

/// One assembled output JSA with its components.
pub struct OutputJsa<T: Float> {
    pub total: JsaGrid<T>,
    pub coherent: JsaGrid<T>,
    pub redistribution: JsaGrid<T>,
    /// Per-point quadrature error bounds (quadrature path only).
    pub quad_errors: Option<Array2<T>>,
    pub max_quad_error: T,
}

/// Evaluate the full output JSA `F_c + F_r` on the configured grid.
/// Evaluations are pure and row-parallel; results do not depend on thread
/// scheduling.
pub fn output_jsa<T: Float, F: InputJsa<T> + Sync>(
    config: &ModelConfig<T>,
    dec: &PoleDecomposition<T>,
    input: &F,
    mode: &EngineMode,
    terms: &EngineTerms,
) -> Result<OutputJsa<T>, ScatteringError> {
    output_jsa_on(config, &config.grid, dec, input, mode, terms)
}

/// Same as [`output_jsa`] with an explicit grid (used by convergence checks).
pub fn output_jsa_on<T: Float, F: InputJsa<T> + Sync>(
    config: &ModelConfig<T>,
    spec: &GridSpec<T>,
    dec: &PoleDecomposition<T>,
    input: &F,
    mode: &EngineMode,
    terms: &EngineTerms,
) -> Result<OutputJsa<T>, ScatteringError> {
    if mode.path == PathMode::PoleSum && !input.is_analytic() {
        return Err(ScatteringError::NotAnalytic);
    }
    let mut engine = Engine::new(
        dec,
        config.tc.kappa,
        config.tc.include_delta_sigma,
        input,
        QuadSettings::new(config.solver.quad_rel_tol, config.solver.quad_max_subdivisions),
    );
    engine.terms = *terms;

    let axis = spec.axis();
    let n = axis.len();

    type Row<T> = Vec<(Complex<T>, Complex<T>, T)>;
    let rows: Result<Vec<Row<T>>, ScatteringError> = (0..n)
        .into_par_iter()
        .map(|s| {
            let ws = axis[s];
            let mut row = Vec::with_capacity(n);
            for &wi in &axis {
                let c = engine.coherent(ws, wi)?;
                let (r, err) = engine.redistribution(mode, ws, wi)?;
                row.push((c, r, err));
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;

    let mut coherent = Array2::from_elem((n, n), czero::<T>());
    let mut redist = Array2::from_elem((n, n), czero::<T>());
    let mut errors = Array2::from_elem((n, n), T::zero());
    for (s, row) in rows.iter().enumerate() {
        for (i, &(c, r, e)) in row.iter().enumerate() {
            coherent[(s, i)] = c;
            redist[(s, i)] = r;
            errors[(s, i)] = e;
        }
    }
    let total = &coherent + &redist;
    let max_err = errors.iter().cloned().fold(T::zero(), T::max);

    let meta = |component: &str| -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("component".into(), component.into());
        m.insert(
            "engine_path".into(),
            match mode.path {
                PathMode::PoleSum => "pole_sum".into(),
                PathMode::Quadrature => "quadrature".into(),
            },
        );
        m.insert("kappa_ev".into(), format!("{}", config.tc.kappa));
        m.insert("coupling_ev".into(), format!("{}", config.tc.coupling));
        m.insert("n_bar".into(), format!("{}", config.tc.n_bar));
        if mode.path == PathMode::Quadrature {
            m.insert("quad_max_error".into(), format!("{max_err:e}"));
        }
        m
    };

    Ok(OutputJsa {
        total: JsaGrid::new(axis.clone(), axis.clone(), total, meta("total"))?,
        coherent: JsaGrid::new(axis.clone(), axis.clone(), coherent, meta("coherent"))?,
        redistribution: JsaGrid::new(axis.clone(), axis, redist, meta("redistribution"))?,
        quad_errors: if mode.path == PathMode::Quadrature {
            Some(errors)
        } else {
            None
        },
        max_quad_error: max_err,
    })
}

/// Symmetrized amplitude `(A + A^T) / 2` on a square grid with equal axes.
pub fn symmetrize<T: Float>(grid: &JsaGrid<T>) -> Result<JsaGrid<T>, ScatteringError> {
    if !grid.axes_match(T::lit(1.0e-12)) {
        return Err(ScatteringError::SymmetryDomain);
    }
    let a = grid.amplitudes();
    let half = cre(T::lit(0.5));
    let sym = Array2::from_shape_fn(a.dim(), |(s, i)| (a[(s, i)] + a[(i, s)]) * half);
    let mut meta = grid.metadata.clone();
    meta.insert("symmetrized".into(), "true".into());
    Ok(JsaGrid::new(
        grid.axis_s().to_vec(),
        grid.axis_i().to_vec(),
        sym,
        meta,
    )?)
}
