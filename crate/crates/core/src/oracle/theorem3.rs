use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{svd, Matrix};
use crate::net::{
    accuracy, Activation, GradientSet, InputShape, Layer, LayerSpec, LossKind, Network, SampleBatch,
};
use crate::regula::{
    evaluate, train, DampingSequence, LowRankTargets, Regularizer, TrainConfig, TrainData,
};
use crate::seed::{rng_for, Stream};

use super::dense::{gaussian, top_singular_value};
use super::{Check, OracleError, SweepPoint, TheoremReport};

/// Norm of the penalty gradient `2 gamma (W - LRF_1(W))` as produced by the
/// regularizer code path.
pub fn penalty_gradient_norm(w: &Matrix, gamma: f64) -> Result<f64, OracleError> {
    let net = Network::new(vec![Layer::dense(
        w.clone(),
        vec![0.0; w.rows()],
        Activation::Linear,
    )?])?;
    let targets = LowRankTargets::compute(&net, &[0], 1)?;
    let mut grads = GradientSet::zeros_like(&net);
    targets.add_gradient(&net, &mut grads, gamma);
    Ok(grads.norm())
}

/// For `instances` random `(W, gamma)`, compares the penalty gradient norm
/// with `2 gamma sqrt(||W||_F^2 - sigma_1^2)`, where `sigma_1` comes from
/// power iteration rather than the Jacobi SVD.
pub fn theorem3_gradient_identity(
    instances: usize,
    seed: u64,
) -> Result<TheoremReport, OracleError> {
    let mut rng = rng_for(seed, Stream::Oracle);
    let mut report =
        TheoremReport::new("penalty gradient norm equals 2 gamma times the singular tail")
            .param("instances", instances)
            .param("k", 1);
    for i in 0..instances {
        let rows = rng.random_range(2..=8);
        let cols = rng.random_range(2..=8);
        let gamma: f64 = rng.random_range(0.01..=1.0);
        let w = Matrix::from_fn(rows, cols, |_, _| gaussian(&mut rng));
        let got = penalty_gradient_norm(&w, gamma)?;
        let s1 = top_singular_value(&w, &mut rng);
        let tail_sq = (w.frobenius_norm().powi(2) - s1 * s1).max(0.0);
        let want = 2.0 * gamma * tail_sq.sqrt();
        let sigma = svd(&w)?.sigma;
        let unsquared = 2.0 * gamma * sigma[1..].iter().sum::<f64>().sqrt();
        report.log(format!(
            "#{i} {rows}x{cols} gamma={gamma:.4}: norm {got:.12e}, squared-tail form {want:.12e}, unsquared form {unsquared:.12e}"
        ));
        report.points.push(SweepPoint::new(format!("#{i}")).measure(
            "abs_error",
            (got - want).abs(),
            Check::AtMost { limit: 1e-8 },
        ));
    }
    Ok(report.conclude())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LazyWeightConfig {
    pub dims: usize,
    pub classes: usize,
    pub hidden: usize,
    pub n_train: usize,
    pub n_val: usize,
    /// Fraction of training labels reassigned at random.
    pub label_noise: f64,
    pub epochs: u32,
    pub step_size: f64,
    /// Index of the layer kept out of the selection during training.
    pub lazy_layer: usize,
    /// Step size of the single ALR step after forced selection.
    pub injection_step: f64,
    pub seed: u64,
}

impl Default for LazyWeightConfig {
    fn default() -> Self {
        Self {
            dims: 20,
            classes: 3,
            hidden: 32,
            n_train: 45,
            n_val: 60,
            label_noise: 0.3,
            epochs: 1500,
            step_size: 0.2,
            lazy_layer: 1,
            injection_step: 0.2,
            seed: 0,
        }
    }
}

fn noisy_classes<R: Rng + ?Sized>(
    cfg: &LazyWeightConfig,
    centres: &[Vec<f64>],
    n: usize,
    noise: f64,
    rng: &mut R,
) -> Result<SampleBatch, OracleError> {
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % cfg.classes;
        inputs.push(centres[c].iter().map(|m| m + gaussian(rng)).collect());
        let label = if rng.random::<f64>() < noise {
            rng.random_range(0..cfg.classes)
        } else {
            c
        };
        let mut y = vec![0.0; cfg.classes];
        y[label] = 1.0;
        targets.push(y);
    }
    Ok(SampleBatch::new(inputs, targets)?)
}

/// Trains a small softmax MLP under ALR with the lazy layer's `gamma`
/// pinned to 0 so it is never selected, then forces it into the penalty
/// set (`gamma_reg = 1`) for one step and compares train accuracy before
/// and after.
pub fn theorem3_lazy_weight(cfg: &LazyWeightConfig) -> Result<TheoremReport, OracleError> {
    let mut data_rng = rng_for(cfg.seed, Stream::Data);
    let centres: Vec<Vec<f64>> = (0..cfg.classes)
        .map(|_| {
            (0..cfg.dims)
                .map(|_| 1.5 * gaussian(&mut data_rng))
                .collect()
        })
        .collect();
    let train_set = noisy_classes(cfg, &centres, cfg.n_train, cfg.label_noise, &mut data_rng)?;
    let val_set = noisy_classes(cfg, &centres, cfg.n_val, 0.0, &mut data_rng)?;
    let specs = [
        LayerSpec::Dense {
            units: cfg.hidden,
            activation: Activation::Tanh,
        },
        LayerSpec::Dense {
            units: cfg.hidden,
            activation: Activation::Tanh,
        },
        LayerSpec::Dense {
            units: cfg.classes,
            activation: Activation::Softmax,
        },
    ];
    if cfg.lazy_layer >= specs.len() {
        return Err(OracleError::Config(format!(
            "lazy layer {} out of range",
            cfg.lazy_layer
        )));
    }
    let mut net = Network::init(
        InputShape::flat(cfg.dims),
        &specs,
        &mut rng_for(cfg.seed, Stream::Init),
    )?;
    let train_cfg = TrainConfig {
        loss: LossKind::CrossEntropy,
        step_size: cfg.step_size,
        epsilon: 0.0,
        max_epochs: cfg.epochs,
        regularizer: Regularizer::Alr {
            damping: DampingSequence::InvLog,
        },
        gamma_overrides: vec![(cfg.lazy_layer, 0.0)],
        ..TrainConfig::default()
    };
    let data = TrainData {
        train: &train_set,
        val: &val_set,
        test: None,
    };
    let outcome = train(&mut net, data, &train_cfg, cfg.seed, &mut |_| {})?;
    let last = outcome.last();

    let mut report = TheoremReport::new(
        "forcing a never-selected layer into the low-rank penalty lowers train accuracy",
    )
    .param("lazy_layer", cfg.lazy_layer)
    .param("epochs", outcome.trace.len())
    .param("injection_step", cfg.injection_step)
    .param("seed", cfg.seed);
    let ever = outcome
        .trace
        .iter()
        .any(|m| m.selected.contains(&cfg.lazy_layer));
    report.log(format!(
        "trained: train loss {:.4e}, val loss {:.4e}, grad norm {:.3e}, lazy layer ever selected: {ever}",
        last.train_loss, last.val_loss, last.grad_norm
    ));

    let lazy_w = net.layer(cfg.lazy_layer).weight_matrices();
    let rank = svd(&lazy_w[0])?.rank();
    if rank < 2 {
        report.log("lazy layer has rank 1; penalty gradient vanishes");
        return Ok(report.conclude());
    }
    let (_, before) = evaluate(&net, &train_set, LossKind::CrossEntropy)?;
    let before = before.expect("classification");
    let (_, mut grads) = net.loss_and_gradient(&train_set, LossKind::CrossEntropy)?;
    let targets = LowRankTargets::compute(&net, &[cfg.lazy_layer], 1)?;
    let penalty_norm = {
        let mut g = GradientSet::zeros_like(&net);
        targets.add_gradient(&net, &mut g, 1.0);
        g.norm()
    };
    targets.add_gradient(&net, &mut grads, 1.0);
    net.sgd_step(&grads, cfg.injection_step)?;
    let after =
        accuracy(&net.predict(&train_set.inputs)?, &train_set.targets).expect("classification");
    report.log(format!(
        "lazy layer rank {rank}, penalty gradient norm {penalty_norm:.4e}, train accuracy {before:.4} -> {after:.4}"
    ));
    report.points.push(SweepPoint::new("injection").measure(
        "accuracy_drop",
        before - after,
        Check::Above { limit: 0.0 },
    ));
    Ok(report.conclude())
}

/// Runs the lazy-weight experiment for each seed and requires a strict
/// accuracy drop in at least `min_drops` of them.
pub fn lazy_weight_sweep(
    base: &LazyWeightConfig,
    seeds: &[u64],
    min_drops: usize,
) -> Result<TheoremReport, OracleError> {
    let mut report = TheoremReport::new(
        "forcing a never-selected layer into the low-rank penalty lowers train accuracy",
    )
    .param("seeds", format!("{seeds:?}"))
    .param("injection_step", base.injection_step)
    .param("required_drops", min_drops);
    let mut drops = 0;
    for &seed in seeds {
        let r = theorem3_lazy_weight(&LazyWeightConfig {
            seed,
            ..base.clone()
        })?;
        let drop = r.values_of("accuracy_drop").first().copied();
        if drop.is_some_and(|d| d > 0.0) {
            drops += 1;
        }
        report.log(format!(
            "seed {seed}: {}",
            r.log
                .last()
                .cloned()
                .unwrap_or_else(|| "no measurement".into())
        ));
    }
    report.points.push(SweepPoint::new("seeds").measure(
        "seeds_with_drop",
        drops as f64,
        Check::AtLeast {
            limit: min_drops as f64,
        },
    ));
    Ok(report.conclude())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_example() {
        let w = Matrix::from_diag(&[3.0, 2.0, 1.0]);
        let g = penalty_gradient_norm(&w, 0.5).unwrap();
        assert!((g - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_one_gradient_vanishes() {
        let u = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![-1.0]]).unwrap();
        let v = Matrix::from_rows(&[vec![0.5, 1.0, 3.0]]).unwrap();
        let w = u.matmul(&v).unwrap();
        assert_eq!(penalty_gradient_norm(&w, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_on_random_instances() {
        let r = theorem3_gradient_identity(5, 11).unwrap();
        assert!(r.passed(), "{r}");
    }
}
