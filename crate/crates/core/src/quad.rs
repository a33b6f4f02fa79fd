//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! A 7-point Gauss / 15-point Kronrod pair drives a globally adaptive
//! subdivision: the segment with the largest error estimate is split until the
//! summed estimate meets the tolerance or the subdivision budget runs out.
//! Helpers cover the two patterns the scattering engine needs:
//!
//! * [`integrate_real_line`] — whole-line integrals of rational-type
//!   integrands, realized as a finite window plus exactly mapped tail
//!   segments (`u = W / x`), and
//! * [`principal_value_unit_pole`] — `PV \int f(x)/x dx` over a symmetric
//!   window via the subtraction `\int [f(x) - f(0)]/x dx`, which removes the
//!   singularity analytically.

use num_complex::Complex;
use thiserror::Error;

use crate::float::{czero, Float};

/// Kronrod-15 abscissae on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss-7 weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Error)]
pub enum QuadError<T: Float> {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {best_re:.6e}{best_im:+.6e}i, error {error:.3e})"
    )]
    NonConvergence {
        subdivisions: usize,
        best_re: T,
        best_im: T,
        error: T,
    },
    #[error("integrand pole on (or too close to) the integration path")]
    SingularPath,
}

impl<T: Float> QuadError<T> {
    /// Best estimate carried by a non-convergence error, if any.
    pub fn best_estimate(&self) -> Option<(Complex<T>, T)> {
        match self {
            QuadError::NonConvergence {
                best_re,
                best_im,
                error,
                ..
            } => Some((Complex::new(*best_re, *best_im), *error)),
            QuadError::SingularPath => None,
        }
    }
}

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadSettings<T: Float> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Float> QuadSettings<T> {
    pub fn new(rel_tol: T, max_subdivisions: usize) -> Self {
        Self {
            rel_tol,
            abs_tol: T::lit(1.0e-300),
            max_subdivisions,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl<T: Float> Default for QuadSettings<T> {
    fn default() -> Self {
        Self::new(T::lit(1.0e-8), 4000)
    }
}

/// Integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T: Float> {
    pub value: Complex<T>,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T: Float> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

fn gk15<T: Float, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = (a + b) * half;
    let halflen = (b - a) * half;

    let mut kronrod = czero::<T>();
    let mut gauss = czero::<T>();
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let dx = T::lit(x) * halflen;
        let fsum = if x == 0.0 {
            f(center)
        } else {
            f(center - dx) + f(center + dx)
        };
        kronrod += fsum * Complex::new(T::lit(wk), T::zero());
        if j % 2 == 1 {
            gauss += fsum * Complex::new(T::lit(WG[j / 2]), T::zero());
        }
    }
    let value = kronrod * Complex::new(halflen, T::zero());
    // Conservative estimate: |K15 - G7|. Overestimates on smooth segments and
    // simply costs a few extra splits there.
    let error = (kronrod - gauss).norm() * halflen.abs();
    Segment { a, b, value, error }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<T: Float, F: Fn(T) -> Complex<T>>(
    f: F,
    a: T,
    b: T,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, QuadError<T>> {
    integrate_segments(&f, &[(a, b)], settings)
}

/// Adaptive integration over a union of disjoint segments, sharing one error
/// budget and one subdivision budget.
pub fn integrate_segments<T: Float, F: Fn(T) -> Complex<T>>(
    f: &F,
    segments: &[(T, T)],
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, QuadError<T>> {
    let mut work: Vec<Segment<T>> = segments
        .iter()
        .filter(|(a, b)| *b != *a)
        .map(|&(a, b)| gk15(f, a, b))
        .collect();
    let mut evaluations = 15 * work.len();
    if work.is_empty() {
        return Ok(QuadResult {
            value: czero(),
            error: T::zero(),
            evaluations: 0,
        });
    }

    // Segments too short to split are retired here with their error intact.
    let mut frozen_value = czero::<T>();
    let mut frozen_error = T::zero();

    let mut splits = 0usize;
    loop {
        let mut total = frozen_value;
        let mut err = frozen_error;
        for s in &work {
            total += s.value;
            err += s.error;
        }
        let target = settings.abs_tol.max(settings.rel_tol * total.norm());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if splits >= settings.max_subdivisions || work.is_empty() {
            return Err(QuadError::NonConvergence {
                subdivisions: splits,
                best_re: total.re,
                best_im: total.im,
                error: err,
            });
        }
        // Split the worst live segment.
        let (worst, _) = work
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.partial_cmp(&y.error).unwrap())
            .expect("non-empty worklist");
        let seg = work.swap_remove(worst);
        let mid = (seg.a + seg.b) * T::lit(0.5);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            frozen_value += seg.value;
            frozen_error += seg.error;
            continue;
        }
        work.push(gk15(f, seg.a, mid));
        work.push(gk15(f, mid, seg.b));
        evaluations += 30;
        splits += 1;
    }
}

/// Integrate `f` over the whole real line as `[center - w, center + w]` plus
/// the two tails mapped onto finite intervals by `x = center +- w / u`,
/// `u in (0, 1]`. Exact for integrands decaying at least as `|x|^-2`; the
/// mapped integrand then stays bounded at `u -> 0`.
pub fn integrate_real_line<T: Float, F: Fn(T) -> Complex<T>>(
    f: F,
    center: T,
    half_width: T,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, QuadError<T>> {
    let w = half_width;
    let core = integrate_segments(&f, &[(center - w, center + w)], settings)?;
    let eps = T::lit(1.0e-8);
    let upper = integrate_segments(
        &|u: T| {
            let x = center + w / u;
            f(x) * Complex::new(w / (u * u), T::zero())
        },
        &[(eps, T::one())],
        settings,
    )?;
    let lower = integrate_segments(
        &|u: T| {
            let x = center - w / u;
            f(x) * Complex::new(w / (u * u), T::zero())
        },
        &[(eps, T::one())],
        settings,
    )?;
    Ok(QuadResult {
        value: core.value + upper.value + lower.value,
        error: core.error + upper.error + lower.error,
        evaluations: core.evaluations + upper.evaluations + lower.evaluations,
    })
}

/// Cauchy principal value of `\int_{-w}^{w} f(x) / x dx` via the subtraction
/// `\int [f(x) - f(0)] / x dx` (+ `f(0) \cdot PV\int dx/x = 0` over the
/// symmetric window). Splitting at zero keeps the nodes off the singular
/// point; the regularized integrand is smooth for analytic `f`.
pub fn principal_value_unit_pole<T: Float, F: Fn(T) -> Complex<T>>(
    f: F,
    half_width: T,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>, QuadError<T>> {
    let f0 = f(T::zero());
    let g = move |x: T| (f(x) - f0) / Complex::new(x, T::zero());
    integrate_segments(&g, &[(-half_width, T::zero()), (T::zero(), half_width)], settings)
}
