use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time step {dt} is not aligned with the segment grid (expected dt = {expected})")]
    MisalignedStep { dt: f64, expected: f64 },

    #[error("horizon T = {horizon} is not an integer multiple of dt = {dt}")]
    HorizonNotMultiple { horizon: f64, dt: f64 },

    #[error("control path has {got} samples, expected {expected}")]
    ControlLength { got: usize, expected: usize },

    #[error("control value {value} at step {index} is negative or not finite")]
    NegativeControl { index: usize, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("state is outside the operator domain: {0}")]
    Domain(String),

    #[error("time {t} is not a node of the time grid")]
    OffGrid { t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no root: {0}")]
    NoRoot(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
