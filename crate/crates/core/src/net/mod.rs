//! Small feed-forward engine: dense and valid/stride-1 conv layers, manual
//! backpropagation, MSE / cross-entropy losses and a plain SGD step.

mod activation;
mod layer;
mod loss;
mod network;

pub use activation::Activation;
pub use layer::{Layer, LayerKind};
pub use loss::{accuracy, argmax, loss, LossKind};
pub use network::{
    ForwardCache, GradientSet, InputShape, LayerGradient, LayerSpec, Network, SampleBatch,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("network has no layers")]
    NoLayers,
    #[error("layer {layer}: expected input width {expected}, got {got}")]
    LayerShape {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("bias length {got} does not match {expected} outputs")]
    BiasShape { expected: usize, got: usize },
    #[error("kernel {kernel:?} larger than input {input:?}")]
    KernelTooLarge {
        kernel: (usize, usize),
        input: (usize, usize),
    },
    #[error("conv layer {layer} placed after a dense layer")]
    ConvAfterDense { layer: usize },
    #[error("softmax activation on hidden layer {layer}")]
    SoftmaxNotAtOutput { layer: usize },
    #[error("softmax is only supported on dense output layers")]
    SoftmaxConv,
    #[error("replacement weights do not match the layer shape")]
    WeightShape,
    #[error("gradient shape does not mirror the network at layer {layer}")]
    GradientShape { layer: usize },
    #[error("batch must be nonempty and aligned ({inputs} inputs, {targets} targets)")]
    EmptyOrMisalignedBatch { inputs: usize, targets: usize },
    #[error("batch rows have inconsistent widths")]
    RaggedBatch,
    #[error("targets do not match outputs (expected {expected}, got {got})")]
    TargetShape { expected: usize, got: usize },
    #[error("cross-entropy needs probability outputs; sample {sample} is not a distribution")]
    NotProbabilities { sample: usize },
    #[error("forward cache (version {cache}) is stale for network version {network}")]
    StaleCache { cache: u64, network: u64 },
    #[error("step size must be positive and finite, got {0}")]
    InvalidStepSize(f64),
    #[error("update would make layer {layer} parameters non-finite")]
    NonFiniteParameter { layer: usize },
}
