use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Precondition,
    Convergence,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "{solver} did not converge after {iterations} iterations (last residual {residual:.3e})"
    )]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("contraction failure: operator norm estimate {norm:.6} is not below 1")]
    Contraction { norm: f64 },

    #[error("quadrature failed: estimate {estimate:.6e} with error bound {bound:.3e}")]
    Quadrature { estimate: f64, bound: f64 },

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Wraps the error with the name of the module or pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Precondition(_) | Error::Symmetry(_) => ErrorCategory::Precondition,
            Error::Convergence { .. } | Error::Contraction { .. } | Error::Quadrature { .. } => {
                ErrorCategory::Convergence
            }
            Error::Io { .. } | Error::Format { .. } => ErrorCategory::Io,
            Error::Stage { source, .. } => source.category(),
        }
    }
}

/// Attaches a stage name to the error branch of a result.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
