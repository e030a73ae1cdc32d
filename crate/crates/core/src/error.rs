use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("structure error: {0}")]
    Structure(String),

    /// Cardano's `u` vanished while `p != 0`; the caller should fall back to
    /// the numeric eigensolver.
    #[error("cubic branch degeneracy: |u| = {u_abs:e} below floor {floor:e}")]
    BranchDegeneracy { u_abs: f64, floor: f64 },

    #[error("eigensolver failure: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn dimension(expected: impl Into<String>, got: usize) -> Self {
        Error::Dimension {
            expected: expected.into(),
            got,
        }
    }

    /// Validation-class errors map to CLI exit code 2, solver-class to 3.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::BranchDegeneracy { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(format!("config: {e}"))
    }
}
