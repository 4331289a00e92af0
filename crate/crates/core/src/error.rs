//! Error type shared across the library.

use thiserror::Error;

/// Everything that can go wrong when building operators or running dynamics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical-domain precondition was violated (e.g. a coupling product
    /// outside the closed-form regime).
    #[error("{0}")]
    Domain(String),

    /// Two operators built over different bases were combined.
    #[error("basis mismatch: operator over n_total_max = {0} combined with n_total_max = {1}")]
    BasisMismatch(u32, u32),

    /// A vector or matrix had the wrong dimension for the requested operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A sector index beyond the basis cutoff was requested.
    #[error("sector {n} out of range (n_total_max = {max})")]
    SectorOutOfRange { n: u32, max: u32 },

    /// A Fock state outside the truncated basis was referenced.
    #[error("state ({n_a}, {n_b}) outside basis (n_total_max = {max})")]
    StateOutsideBasis { n_a: u32, n_b: u32, max: u32 },

    /// Model parameters failed validation.
    #[error("{0}")]
    InvalidParams(String),

    /// A numeric input was NaN or infinite.
    #[error("{0} is not finite")]
    NonFinite(String),
}

impl Error {
    /// Stable one-word category token, used by callers that need a
    /// machine-parsable error line.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::BasisMismatch(..) => "basis",
            Error::DimensionMismatch { .. } => "dimension",
            Error::SectorOutOfRange { .. } => "sector",
            Error::StateOutsideBasis { .. } => "state",
            Error::InvalidParams(_) => "params",
            Error::NonFinite(_) => "nonfinite",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
