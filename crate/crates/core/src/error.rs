use alloc::string::String;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element (signed area {area:e})")]
    SingularElement { area: f64 },

    #[error("system has no interior degrees of freedom")]
    EmptySystem,

    #[error("conjugate gradients did not converge in {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("numerical divergence at step {step}")]
    NumericalDivergence { step: usize },

    #[error("firing rate undefined: no surviving neurons")]
    UndefinedRate,

    #[error("relative error undefined: reference has zero norm")]
    UndefinedErrorMetric,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
