use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps these onto process exit codes: configuration problems exit
/// with 2, data problems with 3 and numerical failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A function was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The truncation region carries too little probability to sample from.
    #[error(
        "truncation mass {mass:e} below upper bound {upper} is negligible; \
         treat the region as numerically unreachable"
    )]
    NegligibleMass { mass: f64, upper: f64 },

    /// Too few exceedances above a threshold to fit a tail model.
    #[error("only {count} exceedances above threshold {threshold} (need at least {required})")]
    TooFewExceedances {
        count: usize,
        threshold: f64,
        required: usize,
    },

    /// Invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
