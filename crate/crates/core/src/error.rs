use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HestonError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("non-central chi-squared degrees of freedom must exceed 1, got {dof}")]
    DofOutOfRange { dof: f64 },

    #[error("complex Bessel series did not converge for order {order} at |z| = {modulus}")]
    BesselNonConvergence { order: f64, modulus: f64 },

    #[error("characteristic-function quadrature did not decay after {terms} terms")]
    QuadratureNonConvergence { terms: usize },

    #[error("integrated-variance inversion failed for u = {u}")]
    RootNotBracketed { u: f64 },

    #[error("unsupported product: {0}")]
    UnsupportedProduct(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl HestonError {
    /// Short variant name, used by the CLI when reporting numerical failures.
    pub fn name(&self) -> &'static str {
        match self {
            HestonError::InvalidParams { .. } => "InvalidParams",
            HestonError::DofOutOfRange { .. } => "DofOutOfRange",
            HestonError::BesselNonConvergence { .. } => "BesselNonConvergence",
            HestonError::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            HestonError::RootNotBracketed { .. } => "RootNotBracketed",
            HestonError::UnsupportedProduct(_) => "UnsupportedProduct",
            HestonError::ConfigInvalid(_) => "ConfigInvalid",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        HestonError::InvalidParams {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = HestonError> = std::result::Result<T, E>;
