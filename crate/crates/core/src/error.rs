use thiserror::Error;

/// Errors raised by the divergence, integration, estimation and bound routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `(alpha, lambda)` gives a negative exponent A or B.
    #[error("(alpha = {alpha}, lambda = {lambda}) is outside the supported family: A = {a}, B = {b}")]
    OutOfFamily { alpha: f64, lambda: f64, a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation has no formula for a limiting (A = 0 or B = 0) branch.
    #[error("operation not defined on the {0} branch")]
    BranchUnsupported(&'static str),

    #[error("densities live on different supports: {0} vs {1}")]
    DomainMismatch(String, String),

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("no direct sampler for this density")]
    SamplerUnavailable,

    /// The power integral of the density is infinite.
    #[error("power mass diverges: {0}")]
    MassDiverges(String),

    /// Parameter on or outside an open boundary of the parameter space.
    #[error("parameter {theta:?} is outside the parameter space: {reason}")]
    BoundaryParameter { theta: Vec<f64>, reason: String },

    #[error("every objective evaluation failed: {0}")]
    AllEvaluationsFailed(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
