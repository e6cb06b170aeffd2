use thiserror::Error;

use crate::linalg::SolveReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields or tables live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too large for dense assembly: {n} interior points per axis (max {max})")]
    GridTooLarge { n: usize, max: usize },
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("field is not normalized: L2 norm {norm}")]
    NotNormalized { norm: f64 },
    #[error("linear solve did not converge after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    NotConverged(SolveReport),
    #[error("indefinite shift; reduce tau (curvature {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },
    #[error("singular matrix in dense factorization")]
    Singular,
    #[error("no dissipative step found at step {step} after {halvings} halvings")]
    NoDissipativeStep { step: usize, halvings: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
