//! Training loops: plain SGD, DLR (trigger-driven rank-1 substitution),
//! ALR (damped Tikhonov pull toward rank-1), and the comparison baselines.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::net::{accuracy, loss, GradientSet, LossKind, Network, SampleBatch};
use crate::seed::{rng_for, Stream};

use super::{
    alr_select, dlr_select_and_substitute, gamma_profile, overfit_ratio, sncn, AlrSelection,
    DampingSequence, GammaProfile, LowRankTargets, OverfitDetector, RegError,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Regularizer {
    None,
    Dlr,
    Alr {
        damping: DampingSequence,
    },
    Dropout {
        rate: f64,
    },
    WeightDecay {
        lambda: f64,
    },
    /// Fixed-strength pull of every layer toward the rank-`k` factorization
    /// of the best-validation weights seen so far.
    Asr {
        gamma: f64,
    },
}

impl Regularizer {
    pub fn name(&self) -> String {
        match self {
            Regularizer::None => "none".into(),
            Regularizer::Dlr => "dlr".into(),
            Regularizer::Alr { .. } => "alr".into(),
            Regularizer::Dropout { rate } => format!("dropout:{rate}"),
            Regularizer::WeightDecay { lambda } => format!("weight_decay:{lambda}"),
            Regularizer::Asr { gamma } => format!("asr:{gamma}"),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Regularizer::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                Err(format!("dropout rate must lie in [0, 1), got {rate}"))
            }
            Regularizer::WeightDecay { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => Err(
                format!("weight decay must be finite and >= 0, got {lambda}"),
            ),
            Regularizer::Asr { gamma } if !(gamma >= 0.0 && gamma.is_finite()) => {
                Err(format!("asr gamma must be finite and >= 0, got {gamma}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `none`, `dlr`, `alr`, `dropout:<rate>`, `weight_decay:<lambda>`
/// and `asr:<gamma>`. ALR's damping is configured separately and defaults
/// to `1/ln t` here.
impl FromStr for Regularizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64, String> {
            let a =
                a.ok_or_else(|| format!("regularizer '{head}' needs a value, e.g. {head}:0.1"))?;
            a.parse::<f64>()
                .map_err(|_| format!("bad number '{a}' in regularizer '{s}'"))
        };
        let r = match head {
            "none" if arg.is_none() => Regularizer::None,
            "dlr" if arg.is_none() => Regularizer::Dlr,
            "alr" if arg.is_none() => Regularizer::Alr {
                damping: DampingSequence::InvLog,
            },
            "dropout" => Regularizer::Dropout { rate: num(arg)? },
            "weight_decay" => Regularizer::WeightDecay { lambda: num(arg)? },
            "asr" => Regularizer::Asr { gamma: num(arg)? },
            _ => return Err(format!("unknown regularizer '{s}'")),
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub step_size: f64,
    /// Stop once the full-batch gradient norm drops to this value.
    pub epsilon: f64,
    /// Window length for smoothing `v(t)`.
    pub patience: usize,
    pub max_epochs: u32,
    /// Mini-batch size; 0 means full batch.
    pub batch_size: usize,
    /// Factorization rank used by DLR / ALR / ASR.
    pub rank: usize,
    /// Validation samples used to evaluate per-layer condition numbers.
    pub probe_size: usize,
    pub regularizer: Regularizer,
    /// Fixed `gamma` values replacing the computed ones for the given layers.
    #[serde(default)]
    pub gamma_overrides: Vec<(usize, f64)>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Mse,
            step_size: 0.05,
            epsilon: 1e-6,
            patience: 3,
            max_epochs: 100,
            batch_size: 0,
            rank: 1,
            probe_size: 128,
            regularizer: Regularizer::None,
            gamma_overrides: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(format!(
                "step_size must be positive, got {}",
                self.step_size
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.patience == 0 {
            return Err("patience must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return Err("max_epochs must be at least 1".into());
        }
        if self.rank == 0 {
            return Err("rank must be at least 1".into());
        }
        if self.probe_size == 0 {
            return Err("probe_size must be at least 1".into());
        }
        self.regularizer.validate()
    }
}

/// Train / validation / test splits.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    pub train: &'a SampleBatch,
    pub val: &'a SampleBatch,
    pub test: Option<&'a SampleBatch>,
}

/// One record per epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_loss: f64,
    pub test_loss: Option<f64>,
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
    pub test_acc: Option<f64>,
    /// `val_loss / train_loss`
    pub v: f64,
    /// Mean of the last `patience` values of `v`.
    pub v_mean: f64,
    pub overfit_triggered: bool,
    pub sncn: f64,
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
    /// ALR / ASR layers in the penalty this epoch.
    pub selected: Vec<usize>,
    /// DLR layers replaced by their factorization this epoch.
    pub substituted: Vec<usize>,
    /// Norm of the full-batch gradient of the (penalized) objective.
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxEpochs,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub trace: Vec<EpochMetrics>,
    pub stop: StopReason,
}

impl TrainOutcome {
    pub fn last(&self) -> &EpochMetrics {
        self.trace.last().expect("at least one epoch")
    }
}

struct Rngs {
    shuffle: ChaCha8Rng,
    selection: ChaCha8Rng,
    dropout: ChaCha8Rng,
}

/// Runs the configured training loop, emitting every epoch's metrics to
/// `sink` as soon as they are known.
pub fn train(
    net: &mut Network,
    data: TrainData<'_>,
    cfg: &TrainConfig,
    seed: u64,
    sink: &mut dyn FnMut(&EpochMetrics),
) -> Result<TrainOutcome, RegError> {
    cfg.validate().map_err(RegError::Config)?;
    let mut rngs = Rngs {
        shuffle: rng_for(seed, Stream::Shuffle),
        selection: rng_for(seed, Stream::Selection),
        dropout: rng_for(seed, Stream::Dropout),
    };
    let probe = data.val.head(cfg.probe_size);
    let mut detector = OverfitDetector::new(cfg.patience);
    let mut profile = probe_profile(net, &probe, cfg)?;
    let mut trace = Vec::new();
    let mut asr_best: Option<(f64, LowRankTargets)> = None;
    let n = data.train.len();
    let batch = if cfg.batch_size == 0 || cfg.batch_size >= n {
        n
    } else {
        cfg.batch_size
    };

    for epoch in 1..=cfg.max_epochs {
        // Penalty targets for this epoch.
        let (selection, targets, pen_gamma) = match cfg.regularizer {
            Regularizer::Alr { damping } => {
                let sel = alr_select(&profile, damping, epoch, &mut rngs.selection);
                let t = LowRankTargets::compute(net, &sel.selected, cfg.rank)?;
                let g = sel.gamma_reg;
                (sel, t, g)
            }
            Regularizer::Asr { gamma } => match &asr_best {
                Some((_, t)) => (AlrSelection::new(t.layers().collect()), t.clone(), gamma),
                None => (AlrSelection::default(), LowRankTargets::default(), 0.0),
            },
            _ => (AlrSelection::default(), LowRankTargets::default(), 0.0),
        };

        let mut order: Vec<usize> = (0..n).collect();
        if batch < n {
            order.shuffle(&mut rngs.shuffle);
        }
        for chunk in order.chunks(batch) {
            let owned;
            let mb = if batch == n {
                data.train
            } else {
                owned = data.train.select(chunk);
                &owned
            };
            let cache = match cfg.regularizer {
                Regularizer::Dropout { rate } => {
                    net.forward_with_dropout(&mb.inputs, rate, &mut rngs.dropout)?
                }
                _ => net.forward(&mb.inputs)?,
            };
            let mut grads = net.backward(&cache, &mb.targets, cfg.loss)?;
            add_penalties(net, &mut grads, cfg, &targets, pen_gamma);
            net.sgd_step(&grads, cfg.step_size)
                .map_err(|e| RegError::Diverged {
                    epoch,
                    reason: e.to_string(),
                    trace: trace.clone(),
                })?;
        }

        let (train_loss, train_acc) = evaluate(net, data.train, cfg.loss)?;
        let (val_loss, val_acc) = evaluate(net, data.val, cfg.loss)?;
        let (test_loss, test_acc) = match data.test {
            Some(t) => {
                let (l, a) = evaluate(net, t, cfg.loss)?;
                (Some(l), a)
            }
            None => (None, None),
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(RegError::Diverged {
                epoch,
                reason: format!("loss became non-finite (train {train_loss}, val {val_loss})"),
                trace,
            });
        }

        let v = overfit_ratio(val_loss, train_loss);
        let triggered = detector.push(v);
        profile = probe_profile(net, &probe, cfg)?;
        let logged_profile = profile.clone();

        let substituted = if cfg.regularizer == Regularizer::Dlr && triggered {
            let subs = dlr_select_and_substitute(net, &profile, &mut rngs.selection, cfg.rank)?;
            if !subs.is_empty() {
                profile = probe_profile(net, &probe, cfg)?;
            }
            subs
        } else {
            Vec::new()
        };

        if let Regularizer::Asr { .. } = cfg.regularizer {
            if asr_best.as_ref().is_none_or(|(best, _)| val_loss < *best) {
                let all: Vec<usize> = (0..net.depth()).collect();
                asr_best = Some((val_loss, LowRankTargets::compute(net, &all, cfg.rank)?));
            }
        }

        let (_, mut full) = net.loss_and_gradient(data.train, cfg.loss)?;
        add_penalties(net, &mut full, cfg, &targets, pen_gamma);
        let grad_norm = full.norm();

        let m = EpochMetrics {
            epoch,
            train_loss,
            val_loss,
            test_loss,
            train_acc,
            val_acc,
            test_acc,
            v,
            v_mean: detector.window_mean(),
            overfit_triggered: triggered,
            sncn: sncn(&logged_profile),
            kappa: logged_profile.kappa,
            gamma: logged_profile.gamma,
            selected: selection.selected,
            substituted,
            grad_norm,
        };
        sink(&m);
        trace.push(m);
        if grad_norm <= cfg.epsilon {
            return Ok(TrainOutcome {
                trace,
                stop: StopReason::Converged,
            });
        }
    }
    Ok(TrainOutcome {
        trace,
        stop: StopReason::MaxEpochs,
    })
}

/// DLR training loop.
pub fn train_dlr(
    net: &mut Network,
    data: TrainData<'_>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome, RegError> {
    let cfg = TrainConfig {
        regularizer: Regularizer::Dlr,
        ..cfg.clone()
    };
    train(net, data, &cfg, seed, &mut |_| {})
}

/// ALR training loop with the given damping sequence.
pub fn train_alr(
    net: &mut Network,
    data: TrainData<'_>,
    cfg: &TrainConfig,
    damping: DampingSequence,
    seed: u64,
) -> Result<TrainOutcome, RegError> {
    let cfg = TrainConfig {
        regularizer: Regularizer::Alr { damping },
        ..cfg.clone()
    };
    train(net, data, &cfg, seed, &mut |_| {})
}

fn add_penalties(
    net: &Network,
    grads: &mut GradientSet,
    cfg: &TrainConfig,
    targets: &LowRankTargets,
    gamma: f64,
) {
    if !targets.is_empty() && gamma > 0.0 {
        targets.add_gradient(net, grads, gamma);
    }
    if let Regularizer::WeightDecay { lambda } = cfg.regularizer {
        for (g, layer) in grads.layers.iter_mut().zip(net.layers()) {
            for (gw, w) in g.weights.iter_mut().zip(layer.weights()) {
                *gw += 2.0 * lambda * w;
            }
        }
    }
}

fn probe_profile(
    net: &Network,
    probe: &SampleBatch,
    cfg: &TrainConfig,
) -> Result<GammaProfile, RegError> {
    let mut p = gamma_profile(net, &probe.inputs)?;
    for &(l, g) in &cfg.gamma_overrides {
        if l >= p.len() {
            return Err(RegError::LayerIndex {
                layer: l,
                depth: p.len(),
            });
        }
        p.gamma[l] = g;
    }
    Ok(p)
}

/// Loss and (for one-hot targets) accuracy on a split.
pub fn evaluate(
    net: &Network,
    batch: &SampleBatch,
    kind: LossKind,
) -> Result<(f64, Option<f64>), RegError> {
    let out = net.predict(&batch.inputs)?;
    let l = loss(&out, &batch.targets, kind)?;
    Ok((l, accuracy(&out, &batch.targets)))
}
