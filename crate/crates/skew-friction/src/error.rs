use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set or run configuration violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Adaptive quadrature exhausted its subdivision budget. The best
    /// estimate and its error bound are carried for diagnostics.
    #[error("quadrature failed to converge: value ~ {value}, error estimate {err_estimate}")]
    NoConvergence { value: f64, err_estimate: f64 },

    /// A semi-infinite integrand never met the tail-truncation bound.
    #[error("integrand does not decay on the semi-infinite domain (scanned up to x = {scanned_to})")]
    Divergent { scanned_to: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
