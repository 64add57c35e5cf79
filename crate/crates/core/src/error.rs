use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("codomain signature mismatch")]
    SignatureMismatch,

    #[error("dimension {n} is not supported here (requires n >= {min})")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tensor violates curvature symmetries (defect {defect:e})")]
    SymmetryViolation { defect: f64 },

    #[error("irregular immersion point: first fundamental form is degenerate")]
    IrregularPoint,

    #[error("input is not trace-free (|trace| = {trace:e})")]
    NotTraceFree { trace: f64 },

    #[error("no optimizer start converged ({starts} attempted)")]
    NoConvergedStart { starts: usize },

    #[error("newton iteration failed to converge from every start")]
    NewtonFailed,

    #[error("direction rejection rate {rate:.3} exceeds the allowed {limit:.3}")]
    ExcessiveRejection { rate: f64, limit: f64 },

    #[error("height function is degenerate for this direction (|det Hess| = {hessian_det:e})")]
    DegenerateDirection { hessian_det: f64 },

    #[error("critical set incomplete: index alternating sum {found}, expected {expected}")]
    IncompleteCriticalSet { found: i64, expected: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
