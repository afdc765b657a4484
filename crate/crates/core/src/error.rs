use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Fock cutoff {cutoff} too small: truncation deficit {deficit:.3e} exceeds tolerance {tolerance:.1e}")]
    Truncation {
        cutoff: usize,
        deficit: f64,
        tolerance: f64,
    },

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("series did not converge within {terms} terms (residual {residual:.3e})")]
    SeriesNotConverged { terms: usize, residual: f64 },

    #[error("output bin {bin} has zero evidence P(V) under the given prior")]
    ZeroEvidence { bin: usize },

    #[error("output grid [0, {v_max}] does not cover m = {m_max} (needs v_max >= {required:.3})")]
    GridCoverage { m_max: usize, v_max: f64, required: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("detector config: {0}")]
    Config(String),

    #[error("wigner map format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
