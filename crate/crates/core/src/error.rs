use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("node count overflows: product of dims {0:?} does not fit in usize")]
    NodeCountOverflow(Vec<usize>),

    #[error("node index {index} out of range 1..={node_count}")]
    IndexOutOfRange { index: usize, node_count: usize },

    #[error("digit {digit} out of range for dimension {dim} of size {size}")]
    DigitOutOfRange { dim: usize, digit: usize, size: usize },

    #[error("digit vector has length {got}, lattice has {expected} dimensions")]
    DigitLength { got: usize, expected: usize },

    #[error("matrix of order {order} exceeds the {limit} limit for {what}")]
    SizeLimit { what: &'static str, order: usize, limit: usize },

    #[error("matrix is not symmetric: |a_ij - a_ji| = {deviation:e} at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },

    #[error("argument must lie off the real axis, got z = {0}")]
    RealArgument(Complex64),

    #[error("solver did not converge at z = {z} after {iterations} iterations (residual {residual:e})")]
    NoConvergence { z: Complex64, iterations: usize, residual: f64 },

    #[error("matrix oracle solution deviates from the Kronecker solution form (relative residual {residual:e}, limit {limit:e})")]
    SolutionForm { residual: f64, limit: f64 },

    #[error("singular coefficient system: {0}")]
    Singular(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Stieltjes evaluation failed at x = {x}: {source}")]
    Evaluation {
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("recovered CDF mass at the right grid edge is {mass:.4} (< {min}); widen the grid or reduce epsilon")]
    InsufficientMass { mass: f64, min: f64 },
}
