use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value:e}, error estimate {abs_error:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence {
        value: f64,
        abs_error: f64,
        tolerance: f64,
    },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("{theorem}: {message}")]
    Ordering {
        theorem: &'static str,
        message: String,
    },

    #[error("{theorem}: hypothesis not satisfied: {message}")]
    Hypothesis {
        theorem: &'static str,
        message: String,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("optimizer did not converge from any start ({starts} starts); best log-likelihood {best_loglik}")]
    NonConvergence { starts: usize, best_loglik: f64 },

    #[error("simulation step cap of {cap} exceeded")]
    StepCap { cap: u64 },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
