use thiserror::Error;

/// Errors raised by the simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension N={0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{kind} basis unavailable for N={n}: {reason}")]
    BasisUnavailable {
        kind: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("unsupported map: {0}")]
    UnsupportedMap(String),

    #[error("map is not hyperbolic (|trace| = {0} <= 2)")]
    NotHyperbolic(i64),

    #[error("numerical consistency failure: {0}")]
    NumericalConsistency(String),

    #[error("time {t} outside the computed range 0..={t_max}")]
    TimeOutOfRange { t: usize, t_max: usize },

    #[error("degenerate integration window: entropy area {0} is not positive")]
    DegenerateWindow(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
