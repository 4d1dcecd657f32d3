//! Overfitting detection and the two low-rank regularizers.
//!
//! DLR watches the smoothed validation/train loss ratio and, when it rises,
//! replaces randomly chosen layers by their rank-1 factorization with
//! probability proportional to each layer's normalized condition number.
//! ALR instead selects layers every epoch, with the selection probability
//! divided by a damping sequence, and adds a Tikhonov penalty pulling the
//! selected weights toward their factorization.

mod damping;
mod gamma;
mod overfit;
mod select;
mod tikhonov;
mod train;

pub use damping::DampingSequence;
pub use gamma::{gamma_profile, sncn, GammaProfile};
pub use overfit::{overfit_ratio, OverfitDetector, RATIO_SENTINEL};
pub use select::{alr_select, dlr_select_and_substitute, AlrSelection};
pub use tikhonov::{alr_regularized_gradient, LowRankTargets};
pub use train::{
    evaluate, train, train_alr, train_dlr, EpochMetrics, Regularizer, StopReason, TrainConfig,
    TrainData, TrainOutcome,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::net::NetError;

#[derive(Debug, Error)]
pub enum RegError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("gamma profile has {profile} entries for {layers} layers")]
    ProfileLength { profile: usize, layers: usize },
    #[error("layer {layer} out of range for a {depth}-layer network")]
    LayerIndex { layer: usize, depth: usize },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged {
        epoch: u32,
        reason: String,
        trace: Vec<EpochMetrics>,
    },
}
