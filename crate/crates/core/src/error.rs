//! Error type shared by all laboratory modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed to reach tolerance {tol:e} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },
    #[error("damping is not integrable (beta = {beta}, need beta > 1)")]
    NonIntegrableDamping { beta: f64 },
    #[error("tolerance not met: residual {residual:e} > {tol:e}")]
    ToleranceNotMet { residual: f64, tol: f64 },
    #[error("step size too large: {0}")]
    StepSizeTooLarge(String),
    #[error("solution exceeded overflow guard at r = {r}; shrink r_max")]
    OverflowGuard { r: f64 },
    #[error("Riccati variable left the decaying branch at t = {t} (nu = {nu})")]
    RiccatiBlowup { t: f64, nu: f64 },
    #[error("NaN detected at step {step} (t = {t})")]
    NaNDetected { step: usize, t: f64 },
    #[error("CFL violation: dt = {dt} exceeds stable limit {limit}")]
    CFLViolation { dt: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parameters are on the global-existence side: {0}")]
    NoBlowup(String),
    #[error("insufficient points for fit: {got} consistent of {need} required")]
    InsufficientPoints { got: usize, need: usize },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("validation error: {0}")]
    ValidationError(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code convention: 2 = validation, 3 = numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::NonIntegrableDamping { .. }
            | Error::ParseError { .. }
            | Error::ValidationError(_)
            | Error::Io(_)
            | Error::Serialize(_) => 2,
            _ => 3,
        }
    }
}
