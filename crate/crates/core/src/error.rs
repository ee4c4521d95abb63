use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad input: violated preconditions, inconsistent arguments, failed hypothesis gates.
    #[error("validation error: {0}")]
    Validation(String),

    /// Caller passed arguments that do not fit together (e.g. vectors at different base points).
    #[error("usage error: {0}")]
    Usage(String),

    /// A closed form or chart hit a zero denominator / degenerate first fundamental form.
    #[error("singular evaluation at (s, t) = ({s}, {t}): {reason}")]
    Singular { s: f64, t: f64, reason: String },

    /// Iterative method failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("singular Jacobian: pivot {pivot:e} at row {row}")]
    SingularJacobian { row: usize, pivot: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
