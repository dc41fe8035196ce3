use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (best estimate {best:.3e}, error estimate {err:.3e})")]
    NoConvergence { best: f64, err: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("matrix is not positive definite: leading minor {minor} is non-positive")]
    NotPositiveDefinite { minor: usize },

    #[error("insufficient data at visit {visit}: {detail}")]
    InsufficientData { visit: usize, detail: String },

    #[error("singular design: {0}")]
    Singular(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("simulation error: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
