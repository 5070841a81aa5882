use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {got}: {reason}")]
    InvalidDimension { got: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("contraction invariant violated: |s|*K = {q} must be < 1")]
    Contraction { q: f64 },

    #[error("shift bound invariant violated: T*K = {tk} exceeds {limit}")]
    ShiftBound { tk: f64, limit: f64 },

    #[error("fixed-point solver exhausted {iterations} iterations (last step {last_step:e}, tolerance {tolerance:e})")]
    SolverExhausted {
        iterations: usize,
        last_step: f64,
        tolerance: f64,
    },

    #[error("solver budget of {max_iterations} iterations cannot certify tolerance {tolerance:e} at q = {q} (needs {needed})")]
    SolverBudget {
        max_iterations: usize,
        needed: usize,
        tolerance: f64,
        q: f64,
    },

    #[error("grid box does not contain the image set (needs [{needed_lo:?}, {needed_hi:?}])")]
    BoxTooSmall {
        needed_lo: Vec<f64>,
        needed_hi: Vec<f64>,
    },

    #[error("covering precondition violated: c = {c} is not below the union measure {union}")]
    CoverPrecondition { c: f64, union: f64 },

    #[error("invalid interval ({a}, {b}): endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("descriptor `{text}`: {reason}")]
    Descriptor { text: String, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("output: {0}")]
    Io(String),
}
