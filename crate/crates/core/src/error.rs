use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol index {index} out of range for alphabet of size {size}")]
    SymbolOutOfRange { index: usize, size: usize },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("unknown group `{0}` (expected f2, z2, bs:P:Q, thompson, zwrz, zwrf2 or zwrzwrz)")]
    UnknownGroup(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no geodesic metric available: {0}")]
    MetricUnavailable(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-integral series coefficient at index {0}")]
    NonIntegral(usize),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
