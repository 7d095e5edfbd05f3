use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },

    #[error("inadmissible frame: {0}")]
    Inadmissible(String),

    #[error("singular Betti system (condition number {cond:e})")]
    Singular { cond: f64 },

    /// A documented precondition of an operation does not hold at the input.
    #[error("{module}: precondition violated: {message}")]
    Precondition {
        module: &'static str,
        message: String,
    },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{module}: {message}")]
    Diverged {
        module: &'static str,
        message: String,
    },
}

impl Error {
    pub fn precondition(module: &'static str, message: impl Into<String>) -> Self {
        Error::Precondition {
            module,
            message: message.into(),
        }
    }

    /// Name of the module that raised the error, for refusal diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => "poly_core",
            Error::Inadmissible(_) => "period_geometry",
            Error::Singular { .. } => "betti",
            Error::Precondition { module, .. } | Error::Diverged { module, .. } => module,
            Error::ModeMismatch(_) | Error::Schema(_) => "io",
        }
    }

    /// True for errors that reject a well-formed input whose mathematical
    /// preconditions fail, as opposed to malformed input or configuration.
    pub fn is_refusal(&self) -> bool {
        !matches!(
            self,
            Error::ModeMismatch(_) | Error::Schema(_) | Error::DimensionMismatch { .. }
        )
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
