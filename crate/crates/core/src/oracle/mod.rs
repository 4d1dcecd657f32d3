//! Numerical checks of the results behind the low-rank regularizers, each
//! returning a [`TheoremReport`] with every measured value and the tolerance
//! it was judged against.
//!
//! The reference quantities are computed along routes that avoid the code
//! under test: least-squares fits and alternating least squares go through
//! a Cholesky solver, and leading singular values come from power iteration.

mod als;
mod conjecture1;
mod dense;
mod lemma1;
mod report;
mod theorem1;
mod theorem3;

pub use als::als_lrf_oracle;
pub use conjecture1::{
    conjecture1_linear, conjecture1_probe, conjecture1_scale_sweep, Conjecture1Config,
};
pub use dense::{cholesky_solve, top_singular_value};
pub use lemma1::{lemma1_check, lemma1_sweep, Lemma1Config, PrototypeLayout};
pub use report::{Check, Measurement, SweepPoint, TheoremReport, Verdict};
pub use theorem1::{theorem1_empirical, theorem1_exact, Theorem1Config};
pub use theorem3::{
    lazy_weight_sweep, penalty_gradient_norm, theorem3_gradient_identity, theorem3_lazy_weight,
    LazyWeightConfig,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::net::NetError;
use crate::regula::RegError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Train(#[from] RegError),
    #[error("rank {k} invalid for a {rows}x{cols} matrix")]
    InvalidRank { k: usize, rows: usize, cols: usize },
    #[error("every alternating least squares restart hit singular normal equations")]
    AllRestartsFailed,
    #[error("{0} is singular")]
    Singular(&'static str),
    #[error("invalid oracle config: {0}")]
    Config(String),
}
