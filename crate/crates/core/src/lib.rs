//! Multimode Hong-Ou-Mandel interference of photon pairs from spontaneous
//! parametric down-conversion pumped by Hermite-Gaussian beams.
//!
//! The transverse parity of the pump in `y` together with the exchange
//! symmetry of the polarization state decides whether the coincidence rate
//! at zero delay shows a dip, a peak, or no interference at all.
//!
//! Numerics are generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix the double-precision types used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod hom;
pub mod io;
pub mod modes;
pub mod scalar;
pub mod spdc;

pub use error::{HomError, Result};
pub use scalar::Real;

pub type Grid64 = fields::Grid2D<f64>;
pub type Field64 = fields::ComplexField2D<f64>;
pub type Field32 = fields::ComplexField2D<f32>;
pub type BeamSpec64 = modes::BeamSpec<f64>;
pub type PumpSpec64 = modes::PumpSpec<f64>;
pub type CrystalSpec64 = spdc::CrystalSpec<f64>;
pub type PolarizationMatrix64 = spdc::PolarizationMatrix<f64>;
pub type BeamSplitterSpec64 = hom::BeamSplitterSpec<f64>;
pub type DetectorSpec64 = hom::DetectorSpec<f64>;
pub type HomSetup64 = hom::HomSetup<f64>;
pub type HomSetup32 = hom::HomSetup<f32>;
pub type Scenario64 = experiment::Scenario<f64>;
pub type ScanConfig64 = experiment::ScanConfig<f64>;
pub type CoincidenceCurve64 = experiment::CoincidenceCurve<f64>;
