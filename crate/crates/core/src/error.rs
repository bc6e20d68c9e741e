use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The queueing system has no stationary regime for these parameters.
    #[error("unstable system: {0}")]
    Unstable(String),

    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space has {states} states, limit is {limit}")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error(
        "stationary solver did not converge after {iterations} sweeps (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("redundancy scan exceeded {cap} candidates without settling")]
    ScanCap { cap: usize },
}
