use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("root cell does not intersect the domain")]
    InfeasibleRoot,

    #[error("cell index overflow at depth {depth} (arity {arity})")]
    DepthOverflow { depth: u32, arity: u64 },

    #[error("grid of {points} points exceeds the cap of {cap}; use a coarser eps or a smaller dimension")]
    GridTooLarge { points: u128, cap: usize },

    #[error("input of {size} points exceeds the brute-force cap of {cap}")]
    OracleTooLarge { size: usize, cap: usize },

    #[error("function is not {lip}-Lipschitz: {detail}")]
    NotLipschitz { lip: f64, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
