use thiserror::Error;

/// Errors raised by the solver and diagnostics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its invariant.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    /// No strategy registered under the requested name.
    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    /// Non-finite values appeared in the solution.
    #[error("numerical blowup at step {step} (t = {t})")]
    Blowup { step: usize, t: f64 },

    /// A diagnostic needs data the trajectory did not record.
    #[error("trajectory is missing {0}")]
    MissingData(&'static str),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
