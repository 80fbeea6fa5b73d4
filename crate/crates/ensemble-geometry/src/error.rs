use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects that must share an (instances, classes) shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A score entry violated the [0, 1] range or was not finite.
    #[error("invalid score: {0}")]
    InvalidScore(String),

    /// A label entry was not 0/1, or a row carried no true label.
    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    /// Distance data that cannot come from any real point set
    /// (the closed-form radicand fell below the rounding window).
    #[error("inconsistent distance geometry: {0}")]
    Geometry(String),

    /// A curve parameter left the domain where the expression is real.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact subset enumeration would exceed its evaluation budget.
    #[error(
        "subset enumeration budget exceeded: {combinations} combinations > cap {cap}; \
         use the greedy or local-search method instead"
    )]
    Budget { combinations: u128, cap: u64 },

    /// A dataset cannot be split while preserving class proportions.
    #[error("stratification error: {0}")]
    Stratification(String),

    /// A statistic is undefined because an input has zero variance.
    #[error("undefined correlation: {0}")]
    ZeroVariance(String),

    /// A metric that is only defined for a restricted input family.
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    /// Malformed file content; the message names the offending location.
    #[error("parse error: {0}")]
    Parse(String),

    /// Filesystem failure, with the path that triggered it.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
