//! Cross-validation oracles bundled for the `validate` command.
//!
//! Every check compares two independent evaluation routes of the same
//! quantity and reports the worst relative deviation against a fixed
//! threshold. The checks are pure; callers supply any randomized sample
//! points so runs stay reproducible under a seed.

use num_complex::Complex;
use serde::Serialize;

use crate::config::ModelConfig;
use crate::float::{cre, Float};
use crate::greens::{green_closed, green_conj_closed, PoleDecomposition};
use crate::grid::evaluate_on_grid;
use crate::input::InputJsa;
use crate::quad::QuadSettings;
use crate::scattering::{
    output_jsa_on, symmetrize, Engine, EngineMode, EngineTerms, PathMode, ScatteringError,
};
use crate::schmidt::schmidt_decompose;
use crate::two_particle::{
    bipolariton_green, bipolariton_green_by_convolution, excited_coherence_green,
    excited_coherence_green_by_convolution,
};

/// Outcome of one validation check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation (check-specific metric).
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, worst: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: worst <= threshold,
            worst,
            threshold,
            detail,
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            passed: true,
            worst: 0.0,
            threshold: 0.0,
            detail: format!("skipped: {why}"),
        }
    }
}

/// Paired-path comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl OracleReport {
    pub fn from_checks(checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "[{status}] {:<32} worst {:>12.4e}  (threshold {:.1e})  {}\n",
                c.name, c.worst, c.threshold, c.detail
            ));
        }
        out.push_str(if self.passed {
            "all checks passed\n"
        } else {
            "CHECKS FAILED\n"
        });
        out
    }
}

/// Residue sums of the pole expansion: `u_+ + u_- = n_bar + 1` and
/// `u*_+ + u*_- = n_bar`.
pub fn check_residue_sums<T: Float>(dec: &PoleDecomposition<T>, n_bar: T) -> CheckResult {
    let s = dec.u_plus + dec.u_minus - Complex::new(n_bar + T::one(), T::zero());
    let sc = dec.u_conj_plus + dec.u_conj_minus - Complex::new(n_bar, T::zero());
    let worst = s.norm().max(sc.norm()).to_f64_lossy();
    CheckResult::new(
        "residue-sums",
        worst,
        1.0e-12,
        "pole-expansion coefficients against steady-state populations".into(),
    )
}

/// Pole expansion against the closed rational form for both Green functions.
pub fn check_green_path_equivalence<T: Float>(
    config: &ModelConfig<T>,
    dec: &PoleDecomposition<T>,
    points: &[Complex<T>],
) -> CheckResult {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for &z in points {
        let pair = (dec.green(z), green_closed(z, &config.tc));
        if let (Ok(a), Ok(b)) = pair {
            let scale = b.norm().max(T::lit(1.0e-12));
            worst = worst.max(((a - b).norm() / scale).to_f64_lossy());
            compared += 1;
        }
        let pair_c = (dec.green_conj(z), green_conj_closed(z, &config.tc));
        if let (Ok(a), Ok(b)) = pair_c {
            let scale = b.norm().max(T::lit(1.0e-12));
            worst = worst.max(((a - b).norm() / scale).to_f64_lossy());
        }
    }
    CheckResult::new(
        "green-path-equivalence",
        worst,
        1.0e-10,
        format!("pole sum vs closed form at {compared} sample arguments"),
    )
}

/// Pole formulas of the two-particle propagators against their convolution
/// oracles at real frequencies.
pub fn check_two_particle_oracles<T: Float>(
    dec: &PoleDecomposition<T>,
    omegas_sum: &[T],
    omegas_diff: &[T],
    settings: &QuadSettings<T>,
) -> CheckResult {
    let mut worst = 0.0f64;
    let floor = T::lit(1.0e-12);
    for &w in omegas_sum {
        let pole = match bipolariton_green(cre(w), dec) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if pole.norm() <= floor {
            continue;
        }
        match bipolariton_green_by_convolution(w, dec, settings) {
            Ok(q) => {
                worst = worst.max(((q.value - pole).norm() / pole.norm()).to_f64_lossy());
            }
            Err(e) => {
                return CheckResult::new(
                    "two-particle-oracles",
                    f64::INFINITY,
                    1.0e-6,
                    format!("convolution oracle failed: {e}"),
                )
            }
        }
    }
    for &w in omegas_diff {
        let pole = match excited_coherence_green(cre(w), dec) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if pole.norm() <= floor {
            continue;
        }
        match excited_coherence_green_by_convolution(w, dec, settings) {
            Ok(q) => {
                worst = worst.max(((q.value - pole).norm() / pole.norm()).to_f64_lossy());
            }
            Err(e) => {
                return CheckResult::new(
                    "two-particle-oracles",
                    f64::INFINITY,
                    1.0e-6,
                    format!("convolution oracle failed: {e}"),
                )
            }
        }
    }
    CheckResult::new(
        "two-particle-oracles",
        worst,
        1.0e-6,
        format!(
            "pair-sum at {} and pair-difference at {} frequencies",
            omegas_sum.len(),
            omegas_diff.len()
        ),
    )
}

/// Pole-sum and quadrature redistribution paths on a probe grid, compared on
/// the symmetrized output (relative L2).
pub fn check_engine_cross_path<T, F>(
    config: &ModelConfig<T>,
    dec: &PoleDecomposition<T>,
    input: &F,
    probe_points: usize,
) -> CheckResult
where
    T: Float,
    F: InputJsa<T> + Sync,
{
    if config.tc.kappa == T::zero() {
        return CheckResult::skipped(
            "engine-cross-path",
            "kappa = 0: redistribution vanishes identically on both paths",
        );
    }
    if !input.is_analytic() {
        return CheckResult::skipped(
            "engine-cross-path",
            "measured input has no analytic continuation for the pole-sum path",
        );
    }
    let spec = config.grid.with_n_points(probe_points);
    let run = |mode: EngineMode| -> Result<_, ScatteringError> {
        let out = output_jsa_on(config, &spec, dec, input, &mode, &EngineTerms::default())?;
        symmetrize(&out.total)
    };
    let pole = run(EngineMode::pole_sum());
    let quad = run(EngineMode::quadrature());
    match (pole, quad) {
        (Ok(p), Ok(q)) => {
            let num: T = p
                .amplitudes()
                .iter()
                .zip(q.amplitudes().iter())
                .map(|(a, b)| (*a - *b).norm_sqr())
                .sum();
            let den: T = q.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            let rel = (num / den.max(T::lit(1.0e-300))).sqrt().to_f64_lossy();
            CheckResult::new(
                "engine-cross-path",
                rel,
                1.0e-3,
                format!("symmetrized relative L2 on a {probe_points}x{probe_points} probe grid"),
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckResult::new(
            "engine-cross-path",
            f64::INFINITY,
            1.0e-3,
            format!("engine failure: {e}"),
        ),
    }
}

/// Vacuum reduction: full pole-sum term assembly against the reduced vacuum
/// formula, pointwise on probe points. Meaningful only when the conjugate
/// coefficients vanish.
pub fn check_vacuum_reduction<T, F>(
    config: &ModelConfig<T>,
    dec: &PoleDecomposition<T>,
    input: &F,
    probe: &[(T, T)],
) -> CheckResult
where
    T: Float,
    F: InputJsa<T> + Sync,
{
    let vacuum = dec.u_conj_plus.norm() == T::zero() && dec.u_conj_minus.norm() == T::zero();
    if !vacuum {
        return CheckResult::skipped("vacuum-reduction", "cavity is not in the vacuum state");
    }
    if !input.is_analytic() {
        return CheckResult::skipped("vacuum-reduction", "requires an analytic input");
    }
    if config.tc.kappa == T::zero() {
        return CheckResult::skipped("vacuum-reduction", "kappa = 0: both forms are zero");
    }
    let engine = Engine::new(
        dec,
        config.tc.kappa,
        config.tc.include_delta_sigma,
        input,
        QuadSettings::new(config.solver.quad_rel_tol, config.solver.quad_max_subdivisions),
    );
    let mut worst = 0.0f64;
    let mut scale = T::lit(1.0e-300);
    let mut values = Vec::with_capacity(probe.len());
    for &(ws, wi) in probe {
        let fast = engine.redistribution_pole_sum(ws, wi);
        let full = engine.redistribution_pole_sum_full(ws, wi);
        match (fast, full) {
            (Ok(a), Ok(b)) => {
                scale = scale.max(a.norm());
                values.push((a, b));
            }
            (Err(e), _) | (_, Err(e)) => {
                return CheckResult::new(
                    "vacuum-reduction",
                    f64::INFINITY,
                    1.0e-10,
                    format!("engine failure: {e}"),
                )
            }
        }
    }
    for (a, b) in values {
        worst = worst.max(((a - b).norm() / scale).to_f64_lossy());
    }
    CheckResult::new(
        "vacuum-reduction",
        worst,
        1.0e-10,
        format!("full term assembly vs vacuum formula at {} points", probe.len()),
    )
}

/// Entropy invariances on the input grid: scale invariance and transpose
/// invariance of the Schmidt entropy.
pub fn check_entropy_invariance<T, F>(config: &ModelConfig<T>, input: &F) -> CheckResult
where
    T: Float,
    Complex<T>: faer::traits::ComplexField<Real = T>,
    F: InputJsa<T> + Sync,
{
    let spec = config.grid.with_n_points(config.grid.n_points.min(128));
    let grid = match evaluate_on_grid(input, &spec) {
        Ok(g) => g,
        Err(e) => {
            return CheckResult::new(
                "entropy-invariance",
                f64::INFINITY,
                1.0e-12,
                format!("grid evaluation failed: {e}"),
            )
        }
    };
    let scaled = {
        let amps = grid.amplitudes().mapv(|z| z * Complex::new(T::lit(-2.5), T::lit(1.25)));
        crate::grid::JsaGrid::new(
            grid.axis_s().to_vec(),
            grid.axis_i().to_vec(),
            amps,
            grid.metadata.clone(),
        )
        .expect("scaling preserves validity")
    };
    let transposed = {
        let amps = grid.amplitudes().t().to_owned();
        crate::grid::JsaGrid::new(
            grid.axis_s().to_vec(),
            grid.axis_i().to_vec(),
            amps,
            grid.metadata.clone(),
        )
        .expect("transpose preserves validity")
    };
    let s = |g: &crate::grid::JsaGrid<T>| schmidt_decompose(g, false).map(|x| x.entropy);
    match (s(&grid), s(&scaled), s(&transposed)) {
        (Ok(a), Ok(b), Ok(c)) => {
            let worst = ((a - b).abs().max((a - c).abs())).to_f64_lossy();
            CheckResult::new(
                "entropy-invariance",
                worst,
                1.0e-12,
                "entropy under complex rescaling and transposition".into(),
            )
        }
        _ => CheckResult::new(
            "entropy-invariance",
            f64::INFINITY,
            1.0e-12,
            "Schmidt decomposition failed".into(),
        ),
    }
}

/// `PathMode` re-export for callers assembling reports.
pub use crate::scattering::PathMode as ReportPathMode;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_raw, validate_config};
    use num_complex::Complex64;

    fn baseline() -> ModelConfig<f64> {
        let doc = r#"{
            "tc": {"omega_o_ev": 1.81, "omega_c_ev": 1.81, "gamma_o_ev": 0.020,
                   "kappa_ev": 0.025, "coupling_over_omega_o": 0.0065,
                   "n_bar": 0.0, "sigma_z_bar": -1.0, "sigma_a_bar": [0.0, 0.0]},
            "pump": {"omega_p_ev": 3.62, "sigma_p_ev": 0.010, "crystal_length_mm": 0.1,
                     "theta1_deg": 3.5, "theta2_deg": 3.5, "refractive_index": 1.0},
            "grid": {"omega_min_ev": 1.75, "omega_max_ev": 1.87, "n_points": 64}
        }"#;
        validate_config(&parse_raw(doc).unwrap()).unwrap()
    }

    #[test]
    fn residue_check_passes_and_detects_corruption() {
        let cfg = baseline();
        let dec = PoleDecomposition::from_params(&cfg.tc).unwrap();
        assert!(check_residue_sums(&dec, cfg.tc.n_bar).passed);

        let mut bad = dec;
        bad.u_plus += Complex64::new(1.0e-6, 0.0);
        let r = check_residue_sums(&bad, cfg.tc.n_bar);
        assert!(!r.passed, "corrupted u_+ must fail: {r:?}");
    }

    #[test]
    fn green_equivalence_on_fixed_points() {
        let cfg = baseline();
        let dec = PoleDecomposition::from_params(&cfg.tc).unwrap();
        let points: Vec<Complex64> = (0..50)
            .map(|k| Complex64::new(1.6 + 0.01 * k as f64, if k % 2 == 0 { 0.05 } else { -0.08 }))
            .collect();
        let r = check_green_path_equivalence(&cfg, &dec, &points);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn entropy_invariance_passes() {
        let cfg = baseline();
        let input = crate::input::SpdcJsa::new(cfg.pump.clone());
        let r = check_entropy_invariance(&cfg, &input);
        assert!(r.passed, "{r:?}");
    }
}
