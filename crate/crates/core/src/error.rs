use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {what} (residual estimate {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("positivity lost at t = {t}, x = {x}: min density {rho_min:e}")]
    PositivityLoss { t: f64, x: f64, rho_min: f64 },

    #[error("solution diverged at t = {t}: non-finite value at x = {x}")]
    Divergence { t: f64, x: f64 },

    #[error("vacuum singularity: rho = 0 with momentum {m}")]
    VacuumSingularity { m: f64 },

    #[error("stability violation: dt = {dt:e} exceeds admissible {limit:e} at t = {t}")]
    Stability { t: f64, dt: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty Young-measure cell (t-index {ti}, x-index {xi})")]
    EmptyCell { ti: usize, xi: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by the numerical run itself rather than its setup.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. }
                | Error::PositivityLoss { .. }
                | Error::Divergence { .. }
                | Error::VacuumSingularity { .. }
                | Error::Stability { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
