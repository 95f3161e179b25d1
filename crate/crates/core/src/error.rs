use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("axis {axis} out of range for dimension {dimension}")]
    Axis { axis: usize, dimension: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// The operation's hypotheses do not hold for this input.
    #[error("refused: {0}")]
    Refused(String),

    /// Ratio-type quantities are undefined when the reference energy is zero.
    #[error("zero energy: {0}")]
    ZeroEnergy(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
