use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("gauge mismatch: operator built for {built:?}, requested {requested:?}")]
    GaugeMismatch {
        built: crate::basis::Gauge,
        requested: crate::basis::Gauge,
    },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("Krylov step could not meet tolerance {tol:e} after {halvings} halvings at t = {t}")]
    StepRejected { t: f64, tol: f64, halvings: u32 },

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        trace: Vec<f64>,
    },

    #[error("non-uniform time grid")]
    NonUniformGrid,

    #[error("spectrum analysis failed: {0}")]
    Analysis(String),

    #[error("field too strong for finite-field estimate: relative disagreement {0:.3}")]
    NonlinearResponse(f64),

    #[error("observer aborted the run: {0}")]
    Observer(String),

    #[error("corrupt or unsupported binary blob: {0}")]
    Decode(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
