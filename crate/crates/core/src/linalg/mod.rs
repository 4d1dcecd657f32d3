//! Dense linear algebra: SVD, low-rank factorization, condition numbers and
//! kernel slicing.

mod condition;
mod lrf;
mod matrix;
mod svd;
mod tensor;

pub use condition::{layer_condition_number, matrix_condition_number, KAPPA_SENTINEL};
pub use lrf::{lrf, lrf_from_svd, lrf_reconstruct, rank, truncate_to_rank, LrfPair};
pub use matrix::Matrix;
pub use svd::{svd, SvdResult, JACOBI_TOL, MAX_SWEEPS, RANK_TOL};
pub use tensor::{slice_tensor, unslice_tensor, Tensor4};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("empty shape {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("rank {k} factorization requested for a matrix of numerical rank {rank}")]
    InvalidRank { k: usize, rank: usize },
    #[error("jacobi SVD did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}
