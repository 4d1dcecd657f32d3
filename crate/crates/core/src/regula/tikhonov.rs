use crate::linalg::{truncate_to_rank, Matrix};
use crate::net::{GradientSet, LossKind, Network, SampleBatch};

use super::{AlrSelection, RegError};

/// Frozen targets `T_l` for the penalty `gamma * sum_l ||W_l - T_l||_F^2`.
///
/// For ALR the targets are the rank-`k` factorizations of the current
/// weights, recomputed once per epoch and then held constant, so the
/// penalty gradient is `2 gamma (W_l - T_l)`.
#[derive(Clone, Debug, Default)]
pub struct LowRankTargets {
    /// `(layer, per-matrix targets)`, matrices as in `Layer::weight_matrices`.
    targets: Vec<(usize, Vec<Matrix>)>,
}

impl LowRankTargets {
    /// Rank-`k` factorization of every weight matrix of the given layers.
    /// Matrices of rank `<= k` are their own target.
    pub fn compute(net: &Network, layers: &[usize], k: usize) -> Result<Self, RegError> {
        let mut targets = Vec::with_capacity(layers.len());
        for &l in layers {
            if l >= net.depth() {
                return Err(RegError::LayerIndex {
                    layer: l,
                    depth: net.depth(),
                });
            }
            let mats = net
                .layer(l)
                .weight_matrices()
                .into_iter()
                .map(|m| Ok(truncate_to_rank(&m, k)?.unwrap_or(m)))
                .collect::<Result<Vec<_>, RegError>>()?;
            targets.push((l, mats));
        }
        Ok(Self { targets })
    }

    /// Arbitrary fixed targets, e.g. a factorized snapshot of earlier weights.
    pub fn from_matrices(targets: Vec<(usize, Vec<Matrix>)>) -> Self {
        Self { targets }
    }

    pub fn layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().map(|(l, _)| *l)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `gamma * sum_l ||W_l - T_l||_F^2`
    pub fn penalty(&self, net: &Network, gamma: f64) -> f64 {
        let mut total = 0.0;
        for (l, mats) in &self.targets {
            for (w, t) in net.layer(*l).weight_matrices().iter().zip(mats) {
                total += w
                    .data()
                    .iter()
                    .zip(t.data())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
        }
        gamma * total
    }

    /// Adds `2 gamma (W_l - T_l)` to the weight gradient of every target layer.
    pub fn add_gradient(&self, net: &Network, grads: &mut GradientSet, gamma: f64) {
        for (l, mats) in &self.targets {
            let layer = net.layer(*l);
            let g = &mut grads.layers[*l].weights;
            for (s, (w, t)) in layer.weight_matrices().iter().zip(mats).enumerate() {
                for i in 0..w.rows() {
                    for j in 0..w.cols() {
                        let d = w[(i, j)] - t[(i, j)];
                        if d != 0.0 {
                            g[layer.matrix_entry_offset(s, i, j)] += 2.0 * gamma * d;
                        }
                    }
                }
            }
        }
    }
}

/// Gradient of `E + gamma_reg * sum_{l in sel} ||W_l - LRF_k(W_l)||_F^2`
/// with the factorizations held constant.
pub fn alr_regularized_gradient(
    net: &Network,
    batch: &SampleBatch,
    loss: LossKind,
    sel: &AlrSelection,
    k: usize,
) -> Result<GradientSet, RegError> {
    let (_, mut grads) = net.loss_and_gradient(batch, loss)?;
    if !sel.is_empty() {
        let targets = LowRankTargets::compute(net, &sel.selected, k)?;
        targets.add_gradient(net, &mut grads, sel.gamma_reg);
    }
    Ok(grads)
}
