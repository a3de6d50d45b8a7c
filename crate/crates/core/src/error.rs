//! Error taxonomy shared by every module.

use thiserror::Error;

/// All failure modes surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural misuse: dimension mismatches, unknown mode labels,
    /// inconsistent registries.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A value violates a physics contract it claims to satisfy
    /// (non-unitary transfer, unphysical density matrix, positive dB gain).
    #[error("validation error: {0}")]
    Validation(String),

    /// A post-condition of the physics pipeline failed (photon leakage,
    /// unassigned amplitude at the detection plane).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Post-selection removed every term of the state.
    #[error("post-selection pattern `{pattern}` has zero success probability")]
    EmptyPostSelection { pattern: String },

    /// Malformed analysis input (missing tomography basis, empty dataset).
    #[error("input error: {0}")]
    Input(String),

    /// A least-squares fit did not reach an acceptable residual.
    #[error("fit failure: {reason} (residual rms {residual_rms:.6})")]
    FitFailure { reason: String, residual_rms: f64 },

    /// The likelihood search stopped without meeting its convergence rule.
    #[error("non-convergence after {evaluations} evaluations: {diagnostics}")]
    NonConvergence {
        evaluations: usize,
        diagnostics: String,
    },

    /// A requested calibration target cannot be reached with the allowed
    /// electrical power range.
    #[error("range error: target phase {required_phase_rad} rad outside reachable powers")]
    Range { required_phase_rad: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<V> = std::result::Result<V, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract { .. } | Error::EmptyPostSelection { .. } => 3,
            _ => 2,
        }
    }
}
