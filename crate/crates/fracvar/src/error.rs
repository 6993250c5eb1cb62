use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Gamma is undefined at zero and at negative integers.
    #[error("gamma pole at z = {z}: z must not be zero or a negative integer")]
    GammaPole { z: f64 },

    /// The fractional order must lie strictly between 0 and 1.
    #[error("fractional order alpha = {alpha} is outside (0, 1)")]
    AlphaOutOfRange { alpha: f64 },

    /// A scalar argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Domain(String),

    /// A node index lies outside the grid.
    #[error("index {index} is out of range for a grid with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    /// The weight table is too short for the requested convolution.
    #[error("weight table ends at k = {available} but k = {needed} is required")]
    InsufficientWeights { needed: usize, available: usize },

    /// A slice has the wrong length for the operation.
    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The problem definition itself is unusable.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// The stationarity system failed the affinity probe.
    #[error("stationarity system is not affine in the unknowns; use the Newton path")]
    NotAffine,

    /// Elimination hit a pivot too small to trust.
    #[error("linear system is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },

    /// Newton iteration stalled or ran out of iterations.
    #[error("no convergence after {iterations} iterations: residual norm {residual:.3e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Best interior iterate found before giving up.
        best: Vec<f64>,
    },

    /// An expression failed to parse.
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    /// An expression failed to evaluate.
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
}

pub type Result<T> = std::result::Result<T, Error>;
