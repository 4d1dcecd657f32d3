use serde::{Deserialize, Serialize};

use crate::linalg::truncate_to_rank;
use crate::net::{Activation, InputShape, LayerSpec, LossKind, Network, SampleBatch};
use crate::seed::{rng_for, Stream};

use super::dense::gaussian;
use super::theorem1::least_squares_affine;
use super::{Check, OracleError, SweepPoint, TheoremReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjecture1Config {
    pub dims: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub samples: usize,
    /// Standard deviation of each input feature.
    pub input_scale: f64,
    pub noise: f64,
    /// Full-batch gradient steps before substitution.
    pub train_epochs: u32,
    /// Full-batch gradient steps allowed after substitution.
    pub budget: u32,
    pub step_size: f64,
    /// Layer replaced by its rank-1 factorization.
    pub layer: usize,
    pub seed: u64,
}

impl Default for Conjecture1Config {
    fn default() -> Self {
        Self {
            dims: 8,
            hidden: 16,
            outputs: 4,
            activation: Activation::Tanh,
            samples: 400,
            input_scale: 1.0,
            noise: 0.1,
            train_epochs: 2000,
            budget: 2000,
            step_size: 0.05,
            layer: 0,
            seed: 0,
        }
    }
}

fn regression_data(cfg: &Conjecture1Config) -> Result<SampleBatch, OracleError> {
    let mut rng = rng_for(cfg.seed, Stream::Data);
    let teacher = Network::init(
        InputShape::flat(cfg.dims),
        &[
            LayerSpec::Dense {
                units: cfg.hidden,
                activation: Activation::Tanh,
            },
            LayerSpec::Dense {
                units: cfg.outputs,
                activation: Activation::Linear,
            },
        ],
        &mut rng,
    )?;
    let inputs: Vec<Vec<f64>> = (0..cfg.samples)
        .map(|_| {
            (0..cfg.dims)
                .map(|_| cfg.input_scale * gaussian(&mut rng))
                .collect()
        })
        .collect();
    let mut targets = teacher.predict(&inputs)?;
    for y in &mut targets {
        y.iter_mut()
            .for_each(|v| *v += cfg.noise * gaussian(&mut rng));
    }
    Ok(SampleBatch::new(inputs, targets)?)
}

fn gd(net: &mut Network, batch: &SampleBatch, step: f64, epochs: u32) -> Result<f64, OracleError> {
    for _ in 0..epochs {
        let (_, g) = net.loss_and_gradient(batch, LossKind::Mse)?;
        net.sgd_step(&g, step)?;
    }
    Ok(net.loss_and_gradient(batch, LossKind::Mse)?.0)
}

/// Trains a two-layer regression net, replaces one layer by its rank-1
/// factorization and counts full-batch steps until the loss is back within
/// 1% of its pre-substitution value. Observational only.
pub fn conjecture1_probe(cfg: &Conjecture1Config) -> Result<TheoremReport, OracleError> {
    let batch = regression_data(cfg)?;
    let specs = [
        LayerSpec::Dense {
            units: cfg.hidden,
            activation: cfg.activation,
        },
        LayerSpec::Dense {
            units: cfg.outputs,
            activation: Activation::Linear,
        },
    ];
    if cfg.layer >= specs.len() {
        return Err(OracleError::Config(format!(
            "layer {} out of range",
            cfg.layer
        )));
    }
    let mut net = Network::init(
        InputShape::flat(cfg.dims),
        &specs,
        &mut rng_for(cfg.seed, Stream::Init),
    )?;
    let trained = gd(&mut net, &batch, cfg.step_size, cfg.train_epochs)?;
    let recovery = substitute_and_retrain(
        &mut net,
        &batch,
        cfg.layer,
        cfg.step_size,
        cfg.budget,
        trained,
    )?;

    let mut report =
        TheoremReport::new("retraining after rank-1 substitution returns to the trained loss")
            .param("activation", cfg.activation)
            .param("input_scale", cfg.input_scale)
            .param("layer", cfg.layer)
            .param("budget", cfg.budget)
            .param("seed", cfg.seed);
    report.log(format!(
        "trained loss {trained:.6e}, after substitution {:.6e}",
        recovery.trace.first().copied().unwrap_or(f64::NAN)
    ));
    report.log(format!(
        "loss trace (every 10th step): {}",
        thin_trace(&recovery.trace)
    ));
    report.points.push(recovery.point(cfg.budget));
    Ok(report.observational())
}

/// The linear special case: a one-layer linear map fitted by least squares
/// on inputs `N(0, sigma^2 I)`, retrained with step `1/(2 sigma^2)`.
pub fn conjecture1_linear(cfg: &Conjecture1Config) -> Result<TheoremReport, OracleError> {
    let batch = regression_data(cfg)?;
    let (w, b) = least_squares_affine(&batch)?;
    let mut net = Network::new(vec![crate::net::Layer::dense(w, b, Activation::Linear)?])?;
    let trained = net.loss_and_gradient(&batch, LossKind::Mse)?.0;
    let step = 1.0 / (2.0 * cfg.input_scale * cfg.input_scale);
    let recovery = substitute_and_retrain(&mut net, &batch, 0, step, cfg.budget, trained)?;
    let mut report = TheoremReport::new("linear special case: retraining returns after one step")
        .param("input_scale", cfg.input_scale)
        .param("step", step)
        .param("seed", cfg.seed);
    report.log(format!("loss trace: {}", thin_trace(&recovery.trace)));
    report.points.push(recovery.point(cfg.budget));
    Ok(report.observational())
}

/// Recovery epochs of the nonlinear probe across input scales and seeds.
pub fn conjecture1_scale_sweep(
    base: &Conjecture1Config,
    scales: &[f64],
    seeds: &[u64],
) -> Result<TheoremReport, OracleError> {
    let mut report = TheoremReport::new("recovery epochs against input covariance scale")
        .param("activation", base.activation)
        .param("budget", base.budget);
    for &s in scales {
        let mut epochs = Vec::new();
        for &seed in seeds {
            let cfg = Conjecture1Config {
                input_scale: s,
                seed,
                ..base.clone()
            };
            let r = conjecture1_probe(&cfg)?;
            epochs.push(r.values_of("recovery_epochs")[0]);
        }
        let mut sorted = epochs.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        report.log(format!("scale {s}: epochs {epochs:?}"));
        report
            .points
            .push(SweepPoint::new(format!("scale={s}")).measure(
                "median_recovery_epochs",
                median,
                Check::AtMost {
                    limit: base.budget as f64,
                },
            ));
    }
    let medians = report.values_of("median_recovery_epochs");
    let monotone = medians.windows(2).all(|w| w[0] <= w[1]);
    report.log(format!("medians nondecreasing in scale: {monotone}"));
    Ok(report.observational())
}

struct Recovery {
    /// Loss right after substitution, then after every step.
    trace: Vec<f64>,
    epochs: Option<u32>,
    trained: f64,
}

impl Recovery {
    fn point(&self, budget: u32) -> SweepPoint {
        let spike = self.trace[0] / self.trained;
        SweepPoint::new("retrain")
            .measure("spike_ratio", spike, Check::AtLeast { limit: 1.0 })
            .measure(
                "recovery_epochs",
                self.epochs.map_or(f64::INFINITY, f64::from),
                Check::AtMost {
                    limit: budget as f64,
                },
            )
    }
}

fn substitute_and_retrain(
    net: &mut Network,
    batch: &SampleBatch,
    layer: usize,
    step: f64,
    budget: u32,
    trained: f64,
) -> Result<Recovery, OracleError> {
    let mats: Vec<_> = net
        .layer(layer)
        .weight_matrices()
        .into_iter()
        .map(|m| Ok(truncate_to_rank(&m, 1)?.unwrap_or(m)))
        .collect::<Result<_, OracleError>>()?;
    net.set_weight_matrices(layer, &mats)?;
    let target = 1.01 * trained;
    let mut trace = vec![net.loss_and_gradient(batch, LossKind::Mse)?.0];
    let mut epochs = (trace[0] <= target).then_some(0);
    for t in 1..=budget {
        if epochs.is_some() {
            break;
        }
        let (_, g) = net.loss_and_gradient(batch, LossKind::Mse)?;
        net.sgd_step(&g, step)?;
        let l = net.loss_and_gradient(batch, LossKind::Mse)?.0;
        trace.push(l);
        if l <= target {
            epochs = Some(t);
        }
    }
    Ok(Recovery {
        trace,
        epochs,
        trained,
    })
}

fn thin_trace(trace: &[f64]) -> String {
    trace
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 10 == 0 || *i == trace.len() - 1)
        .map(|(_, l)| format!("{l:.4e}"))
        .collect::<Vec<_>>()
        .join(" ")
}
