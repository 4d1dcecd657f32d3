use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{rank, truncate_to_rank, Matrix};
use crate::net::{Activation, GradientSet, Layer, LossKind, Network, SampleBatch};
use crate::seed::{rng_for, Stream};

use super::dense::{cholesky_solve, gaussian};
use super::{Check, OracleError, SweepPoint, TheoremReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Config {
    /// Input and output dimension of the linear map.
    pub dim: usize,
    pub k_sweep: Vec<usize>,
    /// Standard deviation of each input feature.
    pub sigma: f64,
    /// Standard deviation of the additive target noise (empirical variant).
    pub noise: f64,
    pub samples: usize,
    /// Acceptable relative recovery error for the empirical variant.
    pub recovery_tol: f64,
    /// Acceptable relative gap between post-step and trained loss.
    pub loss_tol: f64,
    pub seed: u64,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            dim: 20,
            k_sweep: (1..20).collect(),
            sigma: 1.0,
            noise: 0.5,
            samples: 10_000,
            recovery_tol: 5e-2,
            loss_tol: 5e-2,
            seed: 0,
        }
    }
}

fn random_map<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let s = 1.0 / (d as f64).sqrt();
    Matrix::from_fn(d, d, |_, _| s * gaussian(rng))
}

fn k_label(k: usize) -> String {
    format!("k={k}")
}

/// Single gradient step on a one-layer linear network with the given
/// weight gradient, returning the new weights.
fn step_weights(w: &Matrix, bias: &[f64], grad: &Matrix, step: f64) -> Result<Matrix, OracleError> {
    let mut net = Network::new(vec![Layer::dense(
        w.clone(),
        bias.to_vec(),
        Activation::Linear,
    )?])?;
    let mut grads = GradientSet::zeros_like(&net);
    grads.layers[0].weights.copy_from_slice(grad.data());
    net.sgd_step(&grads, step)?;
    Ok(net.dense_weights(0).expect("dense").clone())
}

/// Exact-expectation variant: with `x ~ N(0, sigma^2 I)` and targets
/// generated by `W*`, the expected squared-error gradient at `W` is
/// `2 sigma^2 (W - W*)`, so one step of size `1/(2 sigma^2)` from any
/// truncation `LRF_k(W*)` lands on `W*`.
pub fn theorem1_exact(cfg: &Theorem1Config) -> Result<TheoremReport, OracleError> {
    let mut rng = rng_for(cfg.seed, Stream::Oracle);
    let d = cfg.dim;
    let w_star = random_map(d, &mut rng);
    let r = rank(&w_star)?;
    let s2 = cfg.sigma * cfg.sigma;
    let step = 1.0 / (2.0 * s2);
    let bias = vec![0.0; d];
    let norm = w_star.frobenius_norm();

    let mut report =
        TheoremReport::new("one-epoch recovery after rank-k substitution (exact expectation)")
            .param("dim", d)
            .param("sigma", cfg.sigma)
            .param("step", step)
            .param("rank(W*)", r);
    for &k in &cfg.k_sweep {
        if k == 0 || k > r {
            report.points.push(SweepPoint::skipped(
                k_label(k),
                format!("k must lie in 1..={r}"),
            ));
            continue;
        }
        let w_k = truncate_to_rank(&w_star, k)?.unwrap_or_else(|| w_star.clone());
        let diff = w_k.sub(&w_star)?;
        let grad = diff.scale(2.0 * s2);
        let after = step_weights(&w_k, &bias, &grad, step)?;
        let err = after.sub(&w_star)?.frobenius_norm() / norm;
        let pre = s2 * diff.frobenius_norm().powi(2);
        let post = s2 * after.sub(&w_star)?.frobenius_norm().powi(2);
        report.points.push(
            SweepPoint::new(k_label(k))
                .measure("recovery_error", err, Check::Below { limit: 1e-10 })
                .measure("excess_loss_before", pre, Check::AtLeast { limit: 0.0 })
                .measure(
                    "excess_loss_after",
                    post,
                    Check::AtMost {
                        limit: 1e-18 * norm * norm,
                    },
                ),
        );
    }
    Ok(report.conclude())
}

/// Least-squares fit of `y = W x + b`, returning `(W, b)`.
pub(crate) fn least_squares_affine(batch: &SampleBatch) -> Result<(Matrix, Vec<f64>), OracleError> {
    let d = batch.input_len();
    let m = batch.target_len();
    let mut g = Matrix::zeros(d + 1, d + 1);
    let mut b = Matrix::zeros(d + 1, m);
    {
        let gd = g.data_mut();
        for x in &batch.inputs {
            for i in 0..=d {
                let xi = if i < d { x[i] } else { 1.0 };
                for j in 0..=d {
                    let xj = if j < d { x[j] } else { 1.0 };
                    gd[i * (d + 1) + j] += xi * xj;
                }
            }
        }
    }
    {
        let bd = b.data_mut();
        for (x, y) in batch.inputs.iter().zip(&batch.targets) {
            for i in 0..=d {
                let xi = if i < d { x[i] } else { 1.0 };
                for (j, &yj) in y.iter().enumerate() {
                    bd[i * m + j] += xi * yj;
                }
            }
        }
    }
    let theta = cholesky_solve(&g, &b).ok_or(OracleError::Singular("input Gram matrix"))?;
    let w = Matrix::from_fn(m, d, |i, j| theta[(j, i)]);
    let bias = (0..m).map(|j| theta[(d, j)]).collect();
    Ok((w, bias))
}

/// Empirical variant: `W*` is the least-squares fit to noisy samples, each
/// retraining step is one full-batch gradient step on the sample loss.
pub fn theorem1_empirical(cfg: &Theorem1Config) -> Result<TheoremReport, OracleError> {
    let mut rng = rng_for(cfg.seed, Stream::Oracle);
    let d = cfg.dim;
    let w_true = random_map(d, &mut rng);
    let mut inputs = Vec::with_capacity(cfg.samples);
    let mut targets = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let x: Vec<f64> = (0..d).map(|_| cfg.sigma * gaussian(&mut rng)).collect();
        let mut y = w_true.matvec(&x)?;
        y.iter_mut()
            .for_each(|v| *v += cfg.noise * gaussian(&mut rng));
        inputs.push(x);
        targets.push(y);
    }
    let batch = SampleBatch::new(inputs, targets)?;
    let (w_star, bias) = least_squares_affine(&batch)?;
    let r = rank(&w_star)?;
    let net_star = Network::new(vec![Layer::dense(
        w_star.clone(),
        bias.clone(),
        Activation::Linear,
    )?])?;
    let (trained_loss, _) = net_star.loss_and_gradient(&batch, LossKind::Mse)?;
    let step = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    let norm = w_star.frobenius_norm();

    let mut report =
        TheoremReport::new("one-epoch recovery after rank-k substitution (sampled data)")
            .param("dim", d)
            .param("samples", cfg.samples)
            .param("sigma", cfg.sigma)
            .param("noise", cfg.noise)
            .param("step", step)
            .param("rank(W*)", r);
    report.log(format!("trained loss {trained_loss:.6e}"));
    for &k in &cfg.k_sweep {
        if k == 0 || k > r {
            report.points.push(SweepPoint::skipped(
                k_label(k),
                format!("k must lie in 1..={r}"),
            ));
            continue;
        }
        let w_k = truncate_to_rank(&w_star, k)?.unwrap_or_else(|| w_star.clone());
        let mut net = Network::new(vec![Layer::dense(w_k, bias.clone(), Activation::Linear)?])?;
        let (pre, mut grads) = net.loss_and_gradient(&batch, LossKind::Mse)?;
        // Only the weights are retrained; the bias stays at its optimum.
        grads.layers[0].bias.iter_mut().for_each(|g| *g = 0.0);
        net.sgd_step(&grads, step)?;
        let (post, _) = net.loss_and_gradient(&batch, LossKind::Mse)?;
        let after = net.dense_weights(0).expect("dense");
        let err = after.sub(&w_star)?.frobenius_norm() / norm;
        let mut point = SweepPoint::new(k_label(k))
            .measure(
                "recovery_error",
                err,
                Check::Below {
                    limit: cfg.recovery_tol,
                },
            )
            .measure(
                "post_loss_rel_gap",
                (post - trained_loss).abs() / trained_loss,
                Check::Below {
                    limit: cfg.loss_tol,
                },
            );
        if k < r {
            point = point.measure(
                "pre_minus_trained_loss",
                pre - trained_loss,
                Check::Above { limit: 0.0 },
            );
        }
        report.log(format!("k={k}: loss {pre:.6e} -> {post:.6e}"));
        report.points.push(point);
    }
    Ok(report.conclude())
}
