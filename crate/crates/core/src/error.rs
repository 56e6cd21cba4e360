use thiserror::Error;

/// Errors raised by the solver, its kernels and the tooling around them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("function evaluation error in {what} at iterate {detail}")]
    Evaluation { what: &'static str, detail: String },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("trust-region subproblem failed: {0}")]
    Subproblem(String),

    #[error("multiplier search failed to bracket a root after {iterations} iterations")]
    Bracket { iterations: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid value for `{field}`: {value} (must lie in {interval})")]
    Config {
        field: String,
        value: String,
        interval: &'static str,
    },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

impl From<csv::Error> for SolverError {
    fn from(e: csv::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SolverError {
    fn from(e: serde_json::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}
