use thiserror::Error;

/// Everything that can go wrong while building or evaluating a scenario.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite sample at node (ix={ix}, iy={iy})")]
    NonFiniteSample { ix: usize, iy: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grid is not symmetric about y = 0 (center_y = {center_y})")]
    AsymmetricGrid { center_y: f64 },
    #[error("field has zero norm")]
    ZeroField,
    #[error("point ({x}, {y}) lies outside the sampled window")]
    OutOfWindow { x: f64, y: f64 },
    #[error("coincidence baseline is zero; configuration is degenerate")]
    ZeroBaseline,
    #[error("curve has no baseline samples with |delay| >= {min_delay}")]
    InsufficientBaseline { min_delay: f64 },
    #[error("curve has no sample at zero delay")]
    MissingZeroDelay,
    #[error("resource limit: {requested} sample pairs exceeds cap of {cap}")]
    ResourceLimit { requested: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, HomError>;

pub(crate) fn invalid(msg: impl Into<String>) -> HomError {
    HomError::InvalidArgument(msg.into())
}
