use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("objective `{id}` is only C^{smoothness}; order {requested} derivatives are unavailable")]
    OrderUnavailable {
        id: String,
        smoothness: u8,
        requested: u8,
    },

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix dimension {0} exceeds the dense limit {1}")]
    TooLarge(usize, usize),

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("Hessian information is required to classify beyond region R1; use first-order classification instead")]
    HessianRequired,

    #[error("unsupported derivative order p = {0}; only p = 1 and p = 2 are available")]
    UnsupportedOrder(u8),

    #[error("empty sample set")]
    EmptyGrid,

    #[error("no sample has f(x) > f_ref")]
    NoPointsAboveReference,

    #[error("the infimum f_inf is unknown for this trajectory")]
    UnknownInfimum,

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("inadmissible pairing: {0}")]
    Inadmissible(String),

    #[error("trajectory records are missing region labels")]
    MissingRegions,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
