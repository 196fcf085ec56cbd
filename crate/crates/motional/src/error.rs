use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs a power-of-two point count >= 16, got {0}")]
    BadGridSize(usize),

    #[error("grid bounds must satisfy y_max > y_min, got [{y_min}, {y_max}]")]
    BadGridBounds { y_min: f64, y_max: f64 },

    #[error("wavefunction norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("non-finite amplitude encountered")]
    NonFinite,

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("projection basis deviates from orthonormality by {deviation:.3e}")]
    BasisNotOrthonormal { deviation: f64 },

    #[error("time {t} ms outside the control interval [0, {duration} ms]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("control exceeds its bound: max |lambda| = {max_abs:.6} um > {bound} um")]
    BoundViolation { max_abs: f64, bound: f64 },

    #[error("potential is not confining on the grid: {0}")]
    NotConfining(String),

    #[error("propagation diverged at t = {t} ms (max |psi| = {max_abs:.3e})")]
    Diverged { t: f64, max_abs: f64 },

    #[error("{context}: no convergence (last residual {residual:.3e})")]
    NotConverged { context: String, residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
