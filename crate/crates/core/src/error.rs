use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("step size {h} does not divide segment length {len}")]
    StepSize { h: f64, len: f64 },

    #[error("shooting bracket failure: {0}")]
    BracketFailure(String),

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),

    #[error("CFL violation: dt = {dt} exceeds 0.5*dx = {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("singular linear system: {0}")]
    SingularMatrix(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
