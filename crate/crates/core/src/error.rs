use thiserror::Error;

/// Errors raised by the bound, protocol and sweep computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function being evaluated.
    #[error("{name} = {value} is outside the allowed domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// An objective function returned a non-finite value during optimization.
    #[error("objective evaluated to {value} at x = {x}")]
    Evaluation { x: f64, value: f64 },

    /// A covariance matrix violates the uncertainty principle or is malformed.
    #[error("unphysical covariance matrix: {0}")]
    Physicality(String),

    /// A mode index or mode set is invalid for the given state.
    #[error("invalid mode selection: {0}")]
    Modes(String),

    /// A formula is singular at the requested point (e.g. 1/eta at eta = 0).
    #[error("{0} is singular at this point")]
    Singular(&'static str),

    /// The security budget leaves no room for a bound (16 sqrt(eps) >= 1).
    #[error("degenerate security budget: 16*sqrt({epsilon}) >= 1")]
    DegenerateBudget { epsilon: f64 },

    /// An intermediate quantity left its mathematical domain.
    #[error("numerical domain violation in {term}: {detail}")]
    NumericalDomain { term: &'static str, detail: String },

    /// A sweep specification, preset file or config file failed validation.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `lo <= value <= hi` (and finiteness), returning a domain error otherwise.
pub(crate) fn check_closed(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::domain(name, value, domain))
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    check_closed(name, value, 0.0, 1.0, "[0, 1]")
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    check_closed(name, value, 0.0, f64::INFINITY, "[0, inf)")
}
