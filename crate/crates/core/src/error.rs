use thiserror::Error;

/// Errors raised by the solvers, simulators and parameter constructors.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or numerical parameter failed validation.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// A numerical configuration cannot produce a well-posed scheme.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Newton iteration on a semilinear slice exceeded its iteration budget.
    #[error(
        "newton iteration did not converge after {iterations} iterations \
         (last increment {last_increment:.3e}{})",
        slice.map(|s| format!(", time slice {s}")).unwrap_or_default()
    )]
    NonConvergence {
        iterations: usize,
        last_increment: f64,
        slice: Option<usize>,
    },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A required upstream result (barrier curve, surface) is missing or incomplete.
    #[error("missing dependency: {0}")]
    Dependency(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
