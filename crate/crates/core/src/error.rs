use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApqError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("root solver did not converge: {0}")]
    NoConvergence(String),

    #[error("point ({x1}, {x2}) lies outside the domain")]
    OutsideDomain { x1: f64, x2: f64 },

    #[error("point ({x1}, {x2}) is within {tol:e} of a region boundary")]
    NearBoundary { x1: f64, x2: f64, tol: f64 },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight is not integrable at exponent {p}")]
    NonIntegrable { p: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl ApqError {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            ApqError::InvalidParams(_) => "invalid_params",
            ApqError::NoConvergence(_) => "no_convergence",
            ApqError::OutsideDomain { .. } => "outside_domain",
            ApqError::NearBoundary { .. } => "near_boundary",
            ApqError::InvalidWeight(_) => "invalid_weight",
            ApqError::NonIntegrable { .. } => "non_integrable",
            ApqError::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, ApqError>;
