use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("quadrature did not converge: estimate {estimate}, achieved error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("finite-difference step underflow at coordinate {0}")]
    StepUnderflow(usize),

    #[error("degenerate prediction: {0}")]
    Degenerate(String),

    #[error("region detection failed: {0}")]
    RegionDetection(String),

    #[error("outside validity window: {0}")]
    OutsideValidity(String),

    #[error("iteration did not converge: {0}")]
    Convergence(String),

    #[error("non-power-law behaviour: log residual {residual} exceeds {threshold}")]
    NonPowerLaw { residual: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
