use thiserror::Error;

/// Errors raised by the fitting, extrapolation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degree {m} exceeds the design-matrix guard {limit:.3} for {rows} grid points")]
    DegreeGuard { m: usize, rows: usize, limit: f64 },

    #[error("degree M = {m} exceeds N = {n}")]
    DegreeExceedsSamples { m: usize, n: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("grid contains duplicate points at indices {0} and {1}")]
    DuplicateNodes(usize, usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("x = {x} lies outside the extrapolation interval [1, {upper})")]
    OutOfRange { x: f64, upper: f64 },

    #[error("normal equations are numerically indefinite for M = {m}, N = {n}")]
    Factorization { m: usize, n: usize },

    #[error("samples are not on an equispaced grid: first mismatch at index {index} (x = {x}, expected {expected})")]
    NotEquispaced { index: usize, x: f64, expected: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
