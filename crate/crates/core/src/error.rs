use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("series singularity in {function}: {detail} (perturb the offending parameter)")]
    Singularity {
        function: &'static str,
        detail: String,
    },

    #[error("root bracket not found for {what} after {attempts} expansions")]
    BracketFailure { what: &'static str, attempts: usize },

    #[error("root finder did not converge for {what} in {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("non-finite integrand value at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    pub(crate) fn singularity(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Singularity {
            function,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
