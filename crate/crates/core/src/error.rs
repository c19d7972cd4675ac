use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pair is not stabilizable (Riccati iteration produced no stabilizing solution)")]
    NonStabilizable,

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular regression system: {0}")]
    Singular(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("non-convex Q-function: coefficient of u^2 is {omega10} (must be > 0)")]
    NonConvexQ { omega10: f64 },

    #[error("infeasible starting point: {0}")]
    Infeasible(String),

    #[error("objective returned a non-finite value at {0:?}")]
    NonFiniteObjective(Vec<f64>),

    #[error("no bounds entry for phase region {0}")]
    MissingRegion(u8),

    #[error("learning run destabilized: {0}")]
    Destabilized(String),

    #[error("numeric blow-up at t = {t:.3} s: |{what}| = {value:.3e}")]
    NumericBlowup { t: f64, what: String, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
