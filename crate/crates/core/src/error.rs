use thiserror::Error;

/// Errors raised by the noise models, numerical kernels, spectral engine
/// and Monte Carlo oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate chain: stationary law is not unique ({0})")]
    DegenerateChain(String),

    #[error("singular matrix (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("numerics error: {0}")]
    Numerics(String),

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("time {time} outside trajectory span [{start}, {end}]")]
    OutOfSpan { time: f64, start: f64, end: f64 },

    #[error("grid too narrow: tail correction is {fraction:.3} of the integral")]
    GridTooNarrow { fraction: f64 },

    #[error("tau window too short: exp(-Gamma * tau_max) = {residual:e} exceeds 1e-4")]
    TauWindowTooShort { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
