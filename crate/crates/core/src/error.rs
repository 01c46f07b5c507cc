use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The radial integrator could not continue past `last_radius`.
    #[error("integration failed after r = {last_radius:e}: {reason}")]
    Integration { last_radius: f64, reason: String },

    /// The far-field slope is too shallow for the tail of e^U to be integrable.
    #[error("tail diverges: fitted slope {beta} does not exceed n = {n}")]
    TailDivergence { beta: f64, n: usize },

    /// Panel doubling hit its cap before the error estimate met the target.
    #[error("quadrature did not converge: error estimate {err_est:e} after {doublings} doublings")]
    Precision { err_est: f64, doublings: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The superlevel set {U > t} is empty.
    #[error("empty superlevel set: t = {t} is not below the maximum {peak}")]
    EmptyLevelSet { t: f64, peak: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
