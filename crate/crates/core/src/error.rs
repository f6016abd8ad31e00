use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function being evaluated.
    #[error("domain error: {what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A distribution or family parameter is invalid.
    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: String,
        value: f64,
        reason: String,
    },

    /// Monotone root finding did not reach the residual tolerance.
    #[error("inversion did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A sampler could not resolve the tail of the cumulative pmf.
    #[error("sampler tail unresolved beyond {cap} terms")]
    Tail { cap: usize },

    /// An observation lies outside the support of the model.
    #[error("observation {index} (value {value}) lies outside the model support")]
    Support { index: usize, value: f64 },

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A combined extension was requested on a family not closed under composition.
    #[error("family {0} is not closed under pgf composition")]
    NotClosed(String),

    /// A model or stopping specification could not be understood.
    #[error("invalid specification: {0}")]
    Spec(String),

    /// Filesystem or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, value: f64, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            value,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Spec(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
