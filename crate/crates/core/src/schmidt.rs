//! Schmidt decomposition of a discretized JSA and entanglement entropy.
//!
//! The singular values of the amplitude matrix are the (unnormalized) Schmidt
//! coefficients; normalizing their squares to one gives the entropy
//! `S = -sum r^2 ln r^2` in nats. Singular values below `1e-14` of the
//! largest are truncated before normalization so numerical noise cannot leak
//! into the entropy.

use faer::traits::ComplexField;
use faer::Mat;
use num_complex::Complex;
use thiserror::Error;

use crate::config::ModelConfig;
use crate::float::Float;
use crate::greens::PoleDecomposition;
use crate::grid::JsaGrid;
use crate::input::InputJsa;
use crate::scattering::{output_jsa_on, symmetrize, EngineMode, EngineTerms, ScatteringError};

#[derive(Debug, Error)]
pub enum SchmidtError {
    #[error("entropy is undefined for an identically zero amplitude grid")]
    ZeroAmplitude,
    #[error("Schmidt decomposition requires a square grid")]
    NotSquare,
    #[error("singular value decomposition failed: {0}")]
    Backend(String),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

/// Relative threshold under which singular values are treated as noise.
pub const SINGULAR_VALUE_FLOOR: f64 = 1.0e-14;

/// Normalized Schmidt spectrum of a JSA grid.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum<T: Float> {
    /// Raw singular values, non-increasing, after truncation.
    pub coefficients: Vec<T>,
    /// Normalized coefficients with unit square sum.
    pub normalized: Vec<T>,
    /// Entanglement entropy in nats.
    pub entropy: T,
    /// Number of singular values dropped by the noise floor.
    pub truncated: usize,
    /// Axis provenance: (min, max, points) of the signal axis.
    pub grid_meta: (T, T, usize),
    /// Schmidt basis vectors (signal, idler) if requested: columns of U and
    /// rows of V^H for the retained coefficients.
    pub basis: Option<(Vec<Vec<Complex<T>>>, Vec<Vec<Complex<T>>>)>,
}

/// Singular value decomposition of the amplitude matrix.
pub fn schmidt_decompose<T>(grid: &JsaGrid<T>, keep_basis: bool) -> Result<SchmidtSpectrum<T>, SchmidtError>
where
    T: Float,
    Complex<T>: ComplexField<Real = T>,
{
    if !grid.is_square() {
        return Err(SchmidtError::NotSquare);
    }
    let a = grid.amplitudes();
    let n = a.nrows();
    let mat = Mat::from_fn(n, n, |r, c| a[(r, c)]);
    let svd = mat.svd().map_err(|e| SchmidtError::Backend(format!("{e:?}")))?;

    let mut sigmas: Vec<T> = (0..n).map(|j| svd.S()[j].real()).collect();
    sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let largest = sigmas[0];
    if !(largest > T::zero()) {
        return Err(SchmidtError::ZeroAmplitude);
    }
    let floor = largest * T::lit(SINGULAR_VALUE_FLOOR);
    let kept = sigmas.iter().take_while(|&&s| s > floor).count();
    let truncated = sigmas.len() - kept;
    sigmas.truncate(kept);

    let norm_sq: T = sigmas.iter().map(|&s| s * s).sum();
    let norm = norm_sq.sqrt();
    let normalized: Vec<T> = sigmas.iter().map(|&s| s / norm).collect();
    let entropy = normalized
        .iter()
        .map(|&r| {
            let p = r * r;
            if p > T::zero() {
                -p * p.ln()
            } else {
                T::zero()
            }
        })
        .sum();

    let basis = if keep_basis {
        let u = svd.U();
        let v = svd.V();
        let signal: Vec<Vec<Complex<T>>> = (0..kept)
            .map(|j| (0..n).map(|r| u[(r, j)]).collect())
            .collect();
        let idler: Vec<Vec<Complex<T>>> = (0..kept)
            .map(|j| (0..n).map(|r| v[(r, j)].conj()).collect())
            .collect();
        Some((signal, idler))
    } else {
        None
    };

    let (lo, hi) = grid.axis_s_range();
    Ok(SchmidtSpectrum {
        coefficients: sigmas,
        normalized,
        entropy,
        truncated,
        grid_meta: (lo, hi, n),
        basis,
    })
}

/// One row of an entropy sweep over the cooperative coupling.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint<T: Float> {
    pub coupling_over_omega_o: T,
    pub entropy_in: T,
    pub entropy_out: T,
    pub n_points: usize,
    pub truncated: usize,
}

/// Compute the symmetrized output JSA and its entropy for each coupling value.
/// The input entropy is evaluated once (it does not depend on the cavity) and
/// repeated in every row. Entropies are always taken on symmetrized grids.
pub fn entropy_sweep<T, F>(
    config: &ModelConfig<T>,
    dec_for: impl Fn(T) -> Result<PoleDecomposition<T>, crate::greens::GreensError>,
    input: &F,
    mode: &EngineMode,
    couplings: &[T],
) -> Result<Vec<SweepPoint<T>>, SchmidtError>
where
    T: Float,
    Complex<T>: ComplexField<Real = T>,
    F: InputJsa<T> + Sync,
{
    let input_grid = crate::grid::evaluate_on_grid(input, &config.grid)
        .map_err(ScatteringError::from)?;
    let s_in = schmidt_decompose(&symmetrize(&input_grid)?, false)?.entropy;

    let mut rows = Vec::with_capacity(couplings.len());
    for &r in couplings {
        let coupling = r * config.tc.omega_o;
        let mut cfg = config.clone();
        cfg.tc.coupling = coupling;
        let dec = dec_for(coupling).map_err(ScatteringError::from)?;
        let out = output_jsa_on(&cfg, &cfg.grid, &dec, input, mode, &EngineTerms::default())?;
        let sym = symmetrize(&out.total)?;
        let spectrum = schmidt_decompose(&sym, false)?;
        rows.push(SweepPoint {
            coupling_over_omega_o: r,
            entropy_in: s_in,
            entropy_out: spectrum.entropy,
            n_points: config.grid.n_points,
            truncated: spectrum.truncated,
        });
    }
    Ok(rows)
}
