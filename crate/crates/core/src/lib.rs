//! Few-photon simulation and analysis for a chip-fibre-chip photonic
//! interconnect: exact Fock evolution, photon counting statistics, qubit
//! state/process tomography, fringe and CHSH analysis, and heater
//! calibration.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! `f64` is the reference precision and the one the contracts are pinned
//! to. Concrete aliases for the main types live at the crate root.

pub mod analysis;
pub mod calibration;
pub mod components;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod fock_reference;
pub mod linalg;
pub mod optimize;
pub mod qubit;
pub mod rng;
pub mod scalar;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` aliases for the main domain types.
pub type PhotonicState64 = fock::PhotonicState<f64>;
pub type CircuitElement64 = fock::CircuitElement<f64>;
pub type CMat64 = linalg::CMat<f64>;
pub type QubitDensityMatrix64 = tomography::QubitDensityMatrix<f64>;
pub type ProcessMatrix64 = tomography::ProcessMatrix<f64>;


pub type Interconnect64 = components::Interconnect<f64>;

/// `f32` aliases, for callers that trade precision for footprint.
pub type PhotonicState32 = fock::PhotonicState<f32>;
pub type CircuitElement32 = fock::CircuitElement<f32>;
pub type CMat32 = linalg::CMat<f32>;
