use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid filter specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The exchange did not settle. `taps` holds the last iterate.
    #[error("remez exchange did not converge after {iterations} iterations (ripple {ripple:.3e})")]
    Convergence {
        iterations: usize,
        ripple: f64,
        taps: Vec<f64>,
    },

    #[error("PAPR is undefined for an all-zero block")]
    UndefinedPapr,

    #[error("level {level} is outside the curve's probability range [{min}, {max}]")]
    OutOfRange { level: f64, min: f64, max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
