use alloc::string::String;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(&'static str),
    #[error("measure is not normalized: total mass {0}")]
    NotNormalized(f64),
    #[error("singular point")]
    SingularPoint,
    #[error("spectral cutoff {k} must be below N/2 = {half}")]
    CutoffTooLarge { k: usize, half: f64 },
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("degenerate set: {0}")]
    DegenerateSet(&'static str),
    #[error("instance too large ({nodes} nodes); retry with N <= {suggested_n}")]
    InstanceTooLarge { nodes: usize, suggested_n: usize },
    #[error("negative density: clipped mass {0:e} exceeds 1e-8")]
    NegativeDensity(f64),
    #[error("particle collision")]
    Collision,
    #[error("flow unstable: {0}")]
    Unstable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
