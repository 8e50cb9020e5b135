use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Format(String),
    #[error("truncated input: {0}")]
    Truncated(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (max off-diagonal {off_diagonal:e})")]
    Convergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error(
        "within-class scatter plus shrinkage is not positive definite (pivot {pivot}); increase the shrinkage"
    )]
    SingularScatter { pivot: usize },
    #[error("target {target} not reachable: cumulative explained variance peaks at {max_cumulative}")]
    NotReachable { target: f64, max_cumulative: f64 },
    #[error("unexpected dataset layout: {0}")]
    Layout(String),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("source image {index}: {source}")]
    Source {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("feature cache build failed: {failed} of {total} entries could not be processed")]
    BuildFailed {
        failed: usize,
        total: usize,
        failures: Vec<(PathBuf, String)>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
