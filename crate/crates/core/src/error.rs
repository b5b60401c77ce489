use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("field values: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("field contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("input must be mean-zero (mean {mean:e}, tolerance {tolerance:e})")]
    MeanViolation { mean: f64, tolerance: f64 },

    #[error("mass mismatch between time levels ({left:e} vs {right:e})")]
    MassMismatch { left: f64, right: f64 },

    #[error("coefficients are not conjugate-symmetric (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("line-search derivative is not increasing (c1 = {c1:e})")]
    NonMonotone { c1: f64 },

    #[error("PSD iteration diverged at iteration {iteration} (residual {residual:e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("PSD did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("mass drifted to {mass:e} from {mass0:e}")]
    MassDrift { mass: f64, mass0: f64 },

    #[error("output sink: {0}")]
    Sink(alloc::string::String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("segment {segment}, step {step}: {source}")]
    Run {
        segment: usize,
        step: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
