//! Model configuration: physical parameters, grids, and solver settings.
//!
//! A configuration arrives as a JSON document (schema below), is validated
//! once, and is immutable afterwards. Downstream modules assume a validated
//! [`ModelConfig`] and never re-check unit sanity.
//!
//! ```json
//! {
//!   "tc": {
//!     "omega_o_ev": 1.81, "omega_c_ev": 1.81,
//!     "gamma_o_ev": 0.020, "kappa_ev": 0.025,
//!     "coupling_over_omega_o": 0.0065,
//!     "n_bar": 0.0, "sigma_z_bar": -1.0,
//!     "sigma_a_bar": [0.0, 0.0],
//!     "include_delta_sigma": false
//!   },
//!   "pump": {
//!     "omega_p_ev": 3.62, "sigma_p_ev": 0.010,
//!     "crystal_length_mm": 0.1,
//!     "theta1_deg": 3.5, "theta2_deg": 3.5,
//!     "refractive_index": 1.0
//!   },
//!   "grid": { "omega_min_ev": 1.75, "omega_max_ev": 1.87, "n_points": 512 },
//!   "solver": { "quad_rel_tol": 1e-8, "input_jsa": "spdc" }
//! }
//! ```
//!
//! Exactly one of `coupling_ev` / `coupling_over_omega_o` must be present in
//! `"tc"`. The `sigma_a_bar` entry carries the combined steady-state quantity
//! lambda*N*<sigma a> in eV (the per-emitter coherence never enters the final
//! formulas on its own); it is zero in every regime considered here.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::Float;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("configuration schema error: {0}")]
    Schema(String),
    #[error("invalid value for `{field}`: {value} ({bound})")]
    Invariant {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },
    #[error("`tc` must contain exactly one of `coupling_ev` / `coupling_over_omega_o`")]
    CouplingChoice,
    #[error("i/o error reading configuration: {0}")]
    Io(#[from] std::io::Error),
}

/// Tavis-Cummings parameters. Energies in eV with hbar = 1.
///
/// `coupling` is the cooperative coupling lambda*sqrt(N); the model only ever
/// needs lambda*sqrt(N) and lambda^2*N, so lambda and N are never stored
/// separately. `sigma_a` is the combined lambda*N*<sigma a> in eV.
#[derive(Debug, Clone, PartialEq)]
pub struct TcParams<T: Float> {
    pub omega_o: T,
    pub omega_c: T,
    pub gamma_o: T,
    pub kappa: T,
    pub coupling: T,
    pub n_bar: T,
    pub sigma_z: T,
    pub sigma_a: Complex<T>,
    pub include_delta_sigma: bool,
}

impl<T: Float> TcParams<T> {
    /// lambda^2 * N.
    #[inline]
    pub fn coupling_sq(&self) -> T {
        self.coupling * self.coupling
    }

    /// Copy with a different cooperative coupling, for sweeps.
    pub fn with_coupling(&self, coupling: T) -> Self {
        let mut p = self.clone();
        p.coupling = coupling;
        p
    }

    /// Copy with a different steady-state cavity population.
    pub fn with_n_bar(&self, n_bar: T) -> Self {
        let mut p = self.clone();
        p.n_bar = n_bar;
        p
    }
}

/// SPDC pump and collection geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpParams<T: Float> {
    /// Pump center energy (eV).
    pub omega_p: T,
    /// Pump spectral standard deviation (eV).
    pub sigma_p: T,
    /// Crystal length (mm). Converted to nm internally.
    pub crystal_length_mm: T,
    /// Collection angles (degrees). Relabeled on load so that
    /// cos(theta1) <= cos(theta2).
    pub theta1_deg: T,
    pub theta2_deg: T,
    /// Frequency-independent refractive index.
    pub refractive_index: T,
}

impl<T: Float> PumpParams<T> {
    #[inline]
    pub fn crystal_length_nm(&self) -> T {
        self.crystal_length_mm * T::lit(1.0e6)
    }

    #[inline]
    pub fn theta1_rad(&self) -> T {
        self.theta1_deg.to_radians()
    }

    #[inline]
    pub fn theta2_rad(&self) -> T {
        self.theta2_deg.to_radians()
    }
}

/// Uniform square evaluation grid, inclusive of both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T: Float> {
    pub omega_min: T,
    pub omega_max: T,
    pub n_points: usize,
}

impl<T: Float> GridSpec<T> {
    pub fn axis(&self) -> Vec<T> {
        let n = self.n_points;
        let step = (self.omega_max - self.omega_min) / T::from_usize(n - 1).unwrap();
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.omega_max
                } else {
                    self.omega_min + T::from_usize(k).unwrap() * step
                }
            })
            .collect()
    }

    pub fn with_n_points(&self, n_points: usize) -> Self {
        Self {
            n_points,
            ..self.clone()
        }
    }
}

/// Which input JSA the engine consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InputSelection {
    /// Analytic SPDC model built from the pump parameters.
    Spdc,
    /// Measured grid loaded from a `jsa-grid v1` CSV file.
    Measured(String),
}

/// Solver settings with defaults filled during validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings<T: Float> {
    pub quad_rel_tol: T,
    pub quad_max_subdivisions: usize,
    pub input: InputSelection,
}

/// Validated, immutable model configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<T: Float> {
    pub tc: TcParams<T>,
    pub pump: PumpParams<T>,
    pub grid: GridSpec<T>,
    pub solver: SolverSettings<T>,
}

// ---------------------------------------------------------------------------
// Raw JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub tc: RawTc,
    pub pump: RawPump,
    pub grid: RawGrid,
    #[serde(default)]
    pub solver: RawSolver,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTc {
    pub omega_o_ev: f64,
    pub omega_c_ev: f64,
    pub gamma_o_ev: f64,
    pub kappa_ev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_over_omega_o: Option<f64>,
    pub n_bar: f64,
    pub sigma_z_bar: f64,
    #[serde(default)]
    pub sigma_a_bar: [f64; 2],
    #[serde(default)]
    pub include_delta_sigma: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPump {
    pub omega_p_ev: f64,
    pub sigma_p_ev: f64,
    pub crystal_length_mm: f64,
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub refractive_index: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub omega_min_ev: f64,
    pub omega_max_ev: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_max_subdivisions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_jsa: Option<RawInput>,
}

#[allow(clippy::derivable_impls)]
impl Default for RawSolver {
    fn default() -> Self {
        Self {
            quad_rel_tol: None,
            quad_max_subdivisions: None,
            input_jsa: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawInput {
    Name(String),
    Measured { measured: String },
}

pub const DEFAULT_QUAD_REL_TOL: f64 = 1.0e-8;
pub const DEFAULT_QUAD_MAX_SUBDIVISIONS: usize = 4000;
pub const DEFAULT_GRID_MIN_EV: f64 = 1.75;
pub const DEFAULT_GRID_MAX_EV: f64 = 1.87;
pub const DEFAULT_GRID_POINTS: usize = 512;

fn require_finite(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::Invariant {
            field,
            value,
            bound: "must be finite",
        })
    }
}

fn require(field: &'static str, value: f64, ok: bool, bound: &'static str) -> Result<f64, ConfigError> {
    let value = require_finite(field, value)?;
    if ok {
        Ok(value)
    } else {
        Err(ConfigError::Invariant { field, value, bound })
    }
}

/// Parse a JSON document against the schema. Unknown keys are rejected.
pub fn parse_raw(json: &str) -> Result<RawConfig, ConfigError> {
    serde_json::from_str(json).map_err(|e| ConfigError::Schema(e.to_string()))
}

/// Validate a parsed document: check every invariant, fill solver defaults,
/// resolve the coupling alternative, and relabel the collection angles so that
/// cos(theta1) <= cos(theta2).
pub fn validate_config<T: Float>(raw: &RawConfig) -> Result<ModelConfig<T>, ConfigError> {
    let t = &raw.tc;
    let omega_o = require("tc.omega_o_ev", t.omega_o_ev, t.omega_o_ev > 0.0, "> 0")?;
    let omega_c = require("tc.omega_c_ev", t.omega_c_ev, t.omega_c_ev > 0.0, "> 0")?;
    let gamma_o = require("tc.gamma_o_ev", t.gamma_o_ev, t.gamma_o_ev >= 0.0, ">= 0")?;
    let kappa = require("tc.kappa_ev", t.kappa_ev, t.kappa_ev >= 0.0, ">= 0")?;
    let n_bar = require("tc.n_bar", t.n_bar, t.n_bar >= 0.0, ">= 0")?;
    let sigma_z = require(
        "tc.sigma_z_bar",
        t.sigma_z_bar,
        (-1.0..=1.0).contains(&t.sigma_z_bar),
        "in [-1, 1]",
    )?;
    let coupling = match (t.coupling_ev, t.coupling_over_omega_o) {
        (Some(c), None) => require("tc.coupling_ev", c, c >= 0.0, ">= 0")?,
        (None, Some(r)) => {
            require("tc.coupling_over_omega_o", r, r >= 0.0, ">= 0")? * omega_o
        }
        _ => return Err(ConfigError::CouplingChoice),
    };
    require_finite("tc.sigma_a_bar[0]", t.sigma_a_bar[0])?;
    require_finite("tc.sigma_a_bar[1]", t.sigma_a_bar[1])?;

    let p = &raw.pump;
    let omega_p = require("pump.omega_p_ev", p.omega_p_ev, p.omega_p_ev > 0.0, "> 0")?;
    let sigma_p = require("pump.sigma_p_ev", p.sigma_p_ev, p.sigma_p_ev > 0.0, "> 0")?;
    let length = require(
        "pump.crystal_length_mm",
        p.crystal_length_mm,
        p.crystal_length_mm > 0.0,
        "> 0",
    )?;
    let th1 = require(
        "pump.theta1_deg",
        p.theta1_deg,
        (0.0..90.0).contains(&p.theta1_deg),
        "in [0, 90)",
    )?;
    let th2 = require(
        "pump.theta2_deg",
        p.theta2_deg,
        (0.0..90.0).contains(&p.theta2_deg),
        "in [0, 90)",
    )?;
    let nref = require(
        "pump.refractive_index",
        p.refractive_index,
        p.refractive_index > 0.0,
        "> 0",
    )?;
    // cos is decreasing on [0, 90): the larger angle becomes theta1.
    let (theta1_deg, theta2_deg) = if th1 >= th2 { (th1, th2) } else { (th2, th1) };

    let g = &raw.grid;
    let omega_min = require_finite("grid.omega_min_ev", g.omega_min_ev)?;
    let omega_max = require(
        "grid.omega_max_ev",
        g.omega_max_ev,
        g.omega_max_ev > g.omega_min_ev,
        "> omega_min_ev",
    )?;
    if g.n_points < 2 {
        return Err(ConfigError::Invariant {
            field: "grid.n_points",
            value: g.n_points as f64,
            bound: ">= 2",
        });
    }

    let s = &raw.solver;
    let rel_tol = match s.quad_rel_tol {
        Some(v) => require("solver.quad_rel_tol", v, v > 0.0 && v < 1.0, "in (0, 1)")?,
        None => DEFAULT_QUAD_REL_TOL,
    };
    let max_sub = s.quad_max_subdivisions.unwrap_or(DEFAULT_QUAD_MAX_SUBDIVISIONS);
    if max_sub == 0 {
        return Err(ConfigError::Invariant {
            field: "solver.quad_max_subdivisions",
            value: 0.0,
            bound: ">= 1",
        });
    }
    let input = match &s.input_jsa {
        None => InputSelection::Spdc,
        Some(RawInput::Name(n)) if n == "spdc" => InputSelection::Spdc,
        Some(RawInput::Name(n)) => {
            return Err(ConfigError::Schema(format!(
                "solver.input_jsa: unknown source `{n}` (expected \"spdc\" or {{\"measured\": path}})"
            )))
        }
        Some(RawInput::Measured { measured }) => InputSelection::Measured(measured.clone()),
    };

    Ok(ModelConfig {
        tc: TcParams {
            omega_o: T::lit(omega_o),
            omega_c: T::lit(omega_c),
            gamma_o: T::lit(gamma_o),
            kappa: T::lit(kappa),
            coupling: T::lit(coupling),
            n_bar: T::lit(n_bar),
            sigma_z: T::lit(sigma_z),
            sigma_a: Complex::new(T::lit(t.sigma_a_bar[0]), T::lit(t.sigma_a_bar[1])),
            include_delta_sigma: t.include_delta_sigma,
        },
        pump: PumpParams {
            omega_p: T::lit(omega_p),
            sigma_p: T::lit(sigma_p),
            crystal_length_mm: T::lit(length),
            theta1_deg: T::lit(theta1_deg),
            theta2_deg: T::lit(theta2_deg),
            refractive_index: T::lit(nref),
        },
        grid: GridSpec {
            omega_min: T::lit(omega_min),
            omega_max: T::lit(omega_max),
            n_points: g.n_points,
        },
        solver: SolverSettings {
            quad_rel_tol: T::lit(rel_tol),
            quad_max_subdivisions: max_sub,
            input,
        },
    })
}

/// Load and validate a configuration file.
pub fn load_config<T: Float>(path: &std::path::Path) -> Result<ModelConfig<T>, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    validate_config(&parse_raw(&text)?)
}

impl<T: Float> ModelConfig<T> {
    /// Serialize back to the canonical raw schema (always `coupling_ev`,
    /// angles already relabeled). Re-validating the output reproduces this
    /// configuration field by field.
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            tc: RawTc {
                omega_o_ev: self.tc.omega_o.to_f64_lossy(),
                omega_c_ev: self.tc.omega_c.to_f64_lossy(),
                gamma_o_ev: self.tc.gamma_o.to_f64_lossy(),
                kappa_ev: self.tc.kappa.to_f64_lossy(),
                coupling_ev: Some(self.tc.coupling.to_f64_lossy()),
                coupling_over_omega_o: None,
                n_bar: self.tc.n_bar.to_f64_lossy(),
                sigma_z_bar: self.tc.sigma_z.to_f64_lossy(),
                sigma_a_bar: [
                    self.tc.sigma_a.re.to_f64_lossy(),
                    self.tc.sigma_a.im.to_f64_lossy(),
                ],
                include_delta_sigma: self.tc.include_delta_sigma,
            },
            pump: RawPump {
                omega_p_ev: self.pump.omega_p.to_f64_lossy(),
                sigma_p_ev: self.pump.sigma_p.to_f64_lossy(),
                crystal_length_mm: self.pump.crystal_length_mm.to_f64_lossy(),
                theta1_deg: self.pump.theta1_deg.to_f64_lossy(),
                theta2_deg: self.pump.theta2_deg.to_f64_lossy(),
                refractive_index: self.pump.refractive_index.to_f64_lossy(),
            },
            grid: RawGrid {
                omega_min_ev: self.grid.omega_min.to_f64_lossy(),
                omega_max_ev: self.grid.omega_max.to_f64_lossy(),
                n_points: self.grid.n_points,
            },
            solver: RawSolver {
                quad_rel_tol: Some(self.solver.quad_rel_tol.to_f64_lossy()),
                quad_max_subdivisions: Some(self.solver.quad_max_subdivisions),
                input_jsa: Some(match &self.solver.input {
                    InputSelection::Spdc => RawInput::Name("spdc".into()),
                    InputSelection::Measured(p) => RawInput::Measured { measured: p.clone() },
                }),
            },
        }
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("config serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BASELINE: &str = r#"{
        "tc": {
            "omega_o_ev": 1.81, "omega_c_ev": 1.81,
            "gamma_o_ev": 0.020, "kappa_ev": 0.025,
            "coupling_over_omega_o": 0.0065,
            "n_bar": 0.0, "sigma_z_bar": -1.0,
            "sigma_a_bar": [0.0, 0.0]
        },
        "pump": {
            "omega_p_ev": 3.62, "sigma_p_ev": 0.010,
            "crystal_length_mm": 0.1,
            "theta1_deg": 3.5, "theta2_deg": 3.5,
            "refractive_index": 1.0
        },
        "grid": { "omega_min_ev": 1.75, "omega_max_ev": 1.87, "n_points": 512 }
    }"#;

    #[test]
    fn baseline_accepted_with_defaults() {
        let cfg: ModelConfig<f64> = validate_config(&parse_raw(BASELINE).unwrap()).unwrap();
        assert_eq!(cfg.tc.omega_o, 1.81);
        assert_eq!(cfg.tc.coupling, 0.0065 * 1.81);
        assert!(!cfg.tc.include_delta_sigma);
        assert_eq!(cfg.solver.quad_rel_tol, DEFAULT_QUAD_REL_TOL);
        assert_eq!(cfg.solver.input, InputSelection::Spdc);
        assert_eq!(cfg.grid.n_points, 512);
    }

    #[test]
    fn negative_population_rejected() {
        let doc = BASELINE.replace("\"n_bar\": 0.0", "\"n_bar\": -0.5");
        let err = validate_config::<f64>(&parse_raw(&doc).unwrap()).unwrap_err();
        match err {
            ConfigError::Invariant { field, .. } => assert_eq!(field, "tc.n_bar"),
            other => panic!("expected invariant error, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let doc = BASELINE.replace("\"n_bar\": 0.0", "\"n_bar\": 0.0, \"bogus\": 1");
        let err = parse_raw(&doc).unwrap_err();
        assert!(err.to_string().contains("bogus"), "error should name the key: {err}");
    }

    #[test]
    fn coupling_alternatives_are_exclusive() {
        let doc = BASELINE.replace(
            "\"coupling_over_omega_o\": 0.0065",
            "\"coupling_over_omega_o\": 0.0065, \"coupling_ev\": 0.01",
        );
        match validate_config::<f64>(&parse_raw(&doc).unwrap()) {
            Err(ConfigError::CouplingChoice) => {}
            other => panic!("expected coupling-choice error, got {other:?}"),
        }
    }

    #[test]
    fn angle_relabeling_orders_cosines() {
        let doc = BASELINE.replace("\"theta1_deg\": 3.5", "\"theta1_deg\": 1.0");
        let cfg: ModelConfig<f64> = validate_config(&parse_raw(&doc).unwrap()).unwrap();
        assert!(cfg.pump.theta1_deg >= cfg.pump.theta2_deg);
        assert_eq!(cfg.pump.theta1_deg, 3.5);
        assert_eq!(cfg.pump.theta2_deg, 1.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg: ModelConfig<f64> = validate_config(&parse_raw(BASELINE).unwrap()).unwrap();
        let again: ModelConfig<f64> =
            validate_config(&parse_raw(&cfg.to_canonical_json()).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
