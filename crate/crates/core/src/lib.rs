//! Simulation of frequency-entangled photon pairs scattering through a
//! Tavis-Cummings microcavity.
//!
//! The pipeline: validated model parameters ([`config`]) feed the polariton
//! pole machinery ([`greens`], [`two_particle`]); an input joint spectral
//! amplitude ([`input`], [`grid`]) is pushed through the biphoton scattering
//! amplitudes ([`scattering`]); the entanglement entropy of the result comes
//! from a Schmidt decomposition ([`schmidt`]). [`checks`] bundles the
//! cross-validation oracles behind the `validate` CLI command.
//!
//! The numerical core is generic over the scalar type; the aliases below fix
//! the `f64` instantiation used by the CLI and the file formats.

pub mod checks;
pub mod config;
pub mod float;
pub mod greens;
pub mod grid;
pub mod input;
pub mod quad;
pub mod scattering;
pub mod schmidt;
pub mod two_particle;

pub use float::Float;

/// `f64` instantiations of the central types.
pub type ModelConfig64 = config::ModelConfig<f64>;
pub type TcParams64 = config::TcParams<f64>;
pub type PumpParams64 = config::PumpParams<f64>;
pub type GridSpec64 = config::GridSpec<f64>;
pub type PoleDecomposition64 = greens::PoleDecomposition<f64>;
pub type JsaGrid64 = grid::JsaGrid<f64>;
pub type SpdcJsa64 = input::SpdcJsa<f64>;
pub type InputSource64 = input::InputSource<f64>;
pub type SchmidtSpectrum64 = schmidt::SchmidtSpectrum<f64>;
pub type QuadSettings64 = quad::QuadSettings<f64>;
pub type Complex64 = num_complex::Complex<f64>;
