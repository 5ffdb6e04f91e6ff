use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {function}: {message}")]
    Domain {
        function: &'static str,
        message: String,
    },

    /// An adaptive integral did not reach the requested tolerance.
    #[error(
        "integral `{integral}` did not converge: estimate {estimate:e}, error {error:e} \
         exceeds tolerance {tolerance:e} after {intervals} subintervals"
    )]
    NonConvergence {
        integral: String,
        estimate: f64,
        error: f64,
        tolerance: f64,
        intervals: usize,
    },

    /// The deterministic and Monte Carlo estimates of a Brillouin-zone
    /// integral disagree beyond their combined error bars.
    #[error(
        "oracle mismatch for `{integral}`: quadrature {quadrature:e} vs Monte Carlo \
         {monte_carlo:e} +/- {std_error:e}"
    )]
    OracleMismatch {
        integral: String,
        quadrature: f64,
        monte_carlo: f64,
        std_error: f64,
    },

    /// The root of the gap equation could not be bracketed.
    #[error("could not bracket the gap for U = {coupling}: tried [{lo:e}, {hi:e}]")]
    Bracket { coupling: f64, lo: f64, hi: f64 },

    /// A least-squares fit was ill-posed.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A configuration value is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            function,
            message: message.into(),
        }
    }

    /// True when the error is caused by bad input rather than by a
    /// numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Config(_) | Error::DegenerateFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
