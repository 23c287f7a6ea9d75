use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A real-valued argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integer or structural argument violates a precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("x = tanh({beta}·x) has no positive root for beta <= 1")]
    NoPositiveRoot { beta: f64 },

    #[error("weight function vanishes at the minimizer t0 = {t0}")]
    DegenerateWeight { t0: f64 },

    #[error("refusing {what}: {size} exceeds the limit of {limit}")]
    CostGuard {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoPositiveRoot { .. }
                | Error::DegenerateWeight { .. }
                | Error::Quadrature { .. }
        )
    }
}
