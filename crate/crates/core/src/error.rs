use thiserror::Error;

/// Errors raised by model construction, pricing and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The cancellation exponent is non-negative, so the survival process is
    /// identically one and the contract collapses to a plain put.
    #[error("degenerate cancellation: alpha = {alpha} is not negative")]
    DegenerateCancellation { alpha: f64 },

    #[error("Laplace exponent pole: theta = {theta} <= -rho = {neg_rho}")]
    PoleError { theta: f64, neg_rho: f64 },

    #[error("scale-function roots coincide: {0:?}")]
    DegenerateRoots([f64; 3]),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("optimal threshold {a_star} outside (0, {strike})")]
    ThresholdOutOfRange { a_star: f64, strike: f64 },

    #[error("wrong model branch: {0}")]
    BranchError(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("invalid Monte Carlo configuration: {0}")]
    ConfigError(String),
}

impl PricingError {
    /// Stable machine-readable tag, used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            PricingError::InvalidParams(_) => "InvalidParams",
            PricingError::DegenerateCancellation { .. } => "DegenerateCancellation",
            PricingError::PoleError { .. } => "PoleError",
            PricingError::DegenerateRoots(_) => "DegenerateRoots",
            PricingError::DomainError(_) => "DomainError",
            PricingError::ThresholdOutOfRange { .. } => "ThresholdOutOfRange",
            PricingError::BranchError(_) => "BranchError",
            PricingError::QuadratureFailure(_) => "QuadratureFailure",
            PricingError::ConfigError(_) => "ConfigError",
        }
    }
}

pub type Result<T> = std::result::Result<T, PricingError>;
