use std::fmt;
use std::str::FromStr;

use crate::net::{Activation, InputShape, LayerSpec, LossKind};
use crate::regula::{DampingSequence, Regularizer, TrainConfig};

use super::ExpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    GaussianRegression,
    SeparableClassification,
    NoisyIrisLike,
    Csv,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::GaussianRegression => "gaussian-regression",
            DatasetKind::SeparableClassification => "separable-classification",
            DatasetKind::NoisyIrisLike => "noisy-iris-like",
            DatasetKind::Csv => "csv",
        }
    }

    pub fn is_classification(self) -> bool {
        matches!(
            self,
            DatasetKind::SeparableClassification | DatasetKind::NoisyIrisLike
        )
    }
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            DatasetKind::GaussianRegression,
            DatasetKind::SeparableClassification,
            DatasetKind::NoisyIrisLike,
            DatasetKind::Csv,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown dataset '{s}'"))
    }
}

/// Everything needed to reproduce one run. Stored as a flat `key = value`
/// text file; see [`ExperimentConfig::parse`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    /// Input features. Ignored for `noisy-iris-like` (always 4) and `csv`.
    pub dims: usize,
    pub classes: usize,
    /// Target width for `gaussian-regression`.
    pub outputs: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub noise: f64,
    /// Standard deviation of generated input features.
    pub input_scale: f64,
    /// Directory holding `train.csv`, `val.csv`, `test.csv` for `csv`.
    pub data_dir: Option<String>,
    /// Number of trailing target columns in the CSV files.
    pub target_columns: usize,
    pub layers: Vec<LayerSpec>,
    /// `channels x height x width`; flat input when absent.
    pub input_shape: Option<(usize, usize, usize)>,
    pub loss: LossKind,
    pub regularizer: Regularizer,
    pub patience: usize,
    pub epsilon: f64,
    pub step_size: f64,
    pub batch_size: usize,
    pub max_epochs: u32,
    pub rank: usize,
    pub probe_size: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults for everything but the seed.
    pub fn with_seed(seed: u64) -> Self {
        let t = TrainConfig::default();
        Self {
            dataset: DatasetKind::NoisyIrisLike,
            dims: 4,
            classes: 3,
            outputs: 1,
            n_train: 60,
            n_val: 60,
            n_test: 300,
            noise: 0.0,
            input_scale: 1.0,
            data_dir: None,
            target_columns: 1,
            layers: vec![
                LayerSpec::Dense {
                    units: 32,
                    activation: Activation::Tanh,
                },
                LayerSpec::Dense {
                    units: 3,
                    activation: Activation::Softmax,
                },
            ],
            input_shape: None,
            loss: LossKind::CrossEntropy,
            regularizer: Regularizer::None,
            patience: t.patience,
            epsilon: t.epsilon,
            step_size: t.step_size,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            rank: t.rank,
            probe_size: t.probe_size,
            seed,
        }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are
    /// skipped; unknown or repeated keys are errors and `seed` is required.
    /// When `loss` is absent it follows the dataset: cross-entropy for the
    /// classification generators, squared error otherwise.
    pub fn parse(text: &str) -> Result<Self, ExpError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ExpError::Config {
                line: Some(i + 1),
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(&pairs)
    }

    /// Builds a config from `(line, key, value)` triples; `line` 0 means the
    /// value did not come from a file.
    pub fn from_pairs(pairs: &[(usize, String, String)]) -> Result<Self, ExpError> {
        let mut seen: Vec<&str> = Vec::new();
        let mut seed = None;
        let mut cfg = Self::with_seed(0);
        let mut loss_set = false;
        let mut damping = None;
        let mut regularizer = None;
        for (line, key, value) in pairs {
            let err = |msg: String| ExpError::Config {
                line: (*line > 0).then_some(*line),
                msg,
            };
            if seen.contains(&key.as_str()) {
                return Err(err(format!("key '{key}' given twice")));
            }
            seen.push(key);
            let v = value.as_str();
            match key.as_str() {
                "dataset" => cfg.dataset = v.parse().map_err(err)?,
                "dims" => cfg.dims = num(key, v).map_err(err)?,
                "classes" => cfg.classes = num(key, v).map_err(err)?,
                "outputs" => cfg.outputs = num(key, v).map_err(err)?,
                "n_train" => cfg.n_train = num(key, v).map_err(err)?,
                "n_val" => cfg.n_val = num(key, v).map_err(err)?,
                "n_test" => cfg.n_test = num(key, v).map_err(err)?,
                "noise" => cfg.noise = num(key, v).map_err(err)?,
                "input_scale" => cfg.input_scale = num(key, v).map_err(err)?,
                "data_dir" => cfg.data_dir = (!v.is_empty()).then(|| v.to_string()),
                "target_columns" => cfg.target_columns = num(key, v).map_err(err)?,
                "layers" => cfg.layers = parse_layers(v).map_err(err)?,
                "input_shape" => cfg.input_shape = parse_shape(v).map_err(err)?,
                "loss" => {
                    cfg.loss = v.parse().map_err(err)?;
                    loss_set = true;
                }
                "regularizer" => regularizer = Some(v.parse::<Regularizer>().map_err(err)?),
                "damping" => damping = Some(v.parse::<DampingSequence>().map_err(err)?),
                "patience" => cfg.patience = num(key, v).map_err(err)?,
                "epsilon" => cfg.epsilon = num(key, v).map_err(err)?,
                "step_size" => cfg.step_size = num(key, v).map_err(err)?,
                "batch_size" => cfg.batch_size = num(key, v).map_err(err)?,
                "max_epochs" => cfg.max_epochs = num(key, v).map_err(err)?,
                "rank" => cfg.rank = num(key, v).map_err(err)?,
                "probe_size" => cfg.probe_size = num(key, v).map_err(err)?,
                "seed" => seed = Some(num(key, v).map_err(err)?),
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        cfg.seed = seed.ok_or_else(|| ExpError::Config {
            line: None,
            msg: "missing required key 'seed'".into(),
        })?;
        cfg.regularizer = match (regularizer.unwrap_or(Regularizer::None), damping) {
            (Regularizer::Alr { .. }, Some(d)) => Regularizer::Alr { damping: d },
            (Regularizer::Alr { damping }, None) => Regularizer::Alr { damping },
            (r, Some(_)) => {
                return Err(ExpError::Config {
                    line: None,
                    msg: format!("'damping' only applies to regularizer 'alr', not '{r}'"),
                })
            }
            (r, None) => r,
        };
        if !loss_set {
            cfg.loss = if cfg.dataset.is_classification() {
                LossKind::CrossEntropy
            } else {
                LossKind::Mse
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; run before any computation.
    pub fn validate(&self) -> Result<(), ExpError> {
        let bad = |msg: String| Err(ExpError::Config { line: None, msg });
        if self.layers.is_empty() {
            return bad("at least one layer is required".into());
        }
        if self.n_train == 0 || self.n_val == 0 {
            return bad("n_train and n_val must be positive".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        if !(self.input_scale > 0.0 && self.input_scale.is_finite()) {
            return bad(format!(
                "input_scale must be positive, got {}",
                self.input_scale
            ));
        }
        match self.dataset {
            DatasetKind::Csv => {
                if self.data_dir.is_none() {
                    return bad("dataset 'csv' needs data_dir".into());
                }
                if self.target_columns == 0 {
                    return bad("target_columns must be positive".into());
                }
            }
            DatasetKind::SeparableClassification if self.classes < 2 => {
                return bad("classes must be at least 2".into());
            }
            DatasetKind::SeparableClassification | DatasetKind::GaussianRegression
                if self.dims == 0 =>
            {
                return bad("dims must be positive".into());
            }
            DatasetKind::GaussianRegression if self.outputs == 0 => {
                return bad("outputs must be positive".into());
            }
            DatasetKind::NoisyIrisLike if self.noise > 1.0 => {
                return bad(format!(
                    "noisy-iris-like noise must lie in [0, 1], got {}",
                    self.noise
                ));
            }
            _ => {}
        }
        if let Some((c, h, w)) = self.input_shape {
            if c * h * w == 0 {
                return bad("input_shape dimensions must be positive".into());
            }
        }
        self.train_config()
            .validate()
            .map_err(|msg| ExpError::Config { line: None, msg })?;
        self.regularizer
            .validate()
            .map_err(|msg| ExpError::Config { line: None, msg })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            loss: self.loss,
            step_size: self.step_size,
            epsilon: self.epsilon,
            patience: self.patience,
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            rank: self.rank,
            probe_size: self.probe_size,
            regularizer: self.regularizer,
            gamma_overrides: Vec::new(),
        }
    }

    pub fn input_shape_for(&self, features: usize) -> InputShape {
        match self.input_shape {
            Some((channels, height, width)) => InputShape {
                channels,
                height,
                width,
            },
            None => InputShape::flat(features),
        }
    }

    /// Short label: the regularizer plus, for ALR, its damping sequence.
    pub fn label(&self) -> String {
        match self.regularizer {
            Regularizer::Alr { damping } => format!("alr({damping})"),
            r => r.name(),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("bad value '{v}' for '{key}'"))
}

/// `dense:<units>:<activation>` or `conv:<h>x<w>:<filters>:<activation>`,
/// comma separated.
pub fn parse_layers(s: &str) -> Result<Vec<LayerSpec>, String> {
    s.split(',')
        .map(|part| {
            let fields: Vec<&str> = part.trim().split(':').collect();
            match fields.as_slice() {
                ["dense", units, act] => Ok(LayerSpec::Dense {
                    units: num("units", units)?,
                    activation: act.parse()?,
                }),
                ["conv", size, filters, act] => {
                    let (h, w) = size
                        .split_once('x')
                        .ok_or_else(|| format!("conv size must look like 3x3, got '{size}'"))?;
                    Ok(LayerSpec::Conv {
                        filter_height: num("filter height", h)?,
                        filter_width: num("filter width", w)?,
                        filters: num("filters", filters)?,
                        activation: act.parse()?,
                    })
                }
                _ => Err(format!("bad layer '{part}', expected dense:<units>:<act> or conv:<h>x<w>:<filters>:<act>")),
            }
        })
        .collect()
}

pub fn format_layers(layers: &[LayerSpec]) -> String {
    layers
        .iter()
        .map(|l| match l {
            LayerSpec::Dense { units, activation } => format!("dense:{units}:{activation}"),
            LayerSpec::Conv {
                filter_height,
                filter_width,
                filters,
                activation,
            } => format!("conv:{filter_height}x{filter_width}:{filters}:{activation}"),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_shape(s: &str) -> Result<Option<(usize, usize, usize)>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    let dims: Vec<&str> = s.split('x').collect();
    match dims.as_slice() {
        [c, h, w] => Ok(Some((
            num("channels", c)?,
            num("height", h)?,
            num("width", w)?,
        ))),
        _ => Err(format!("input_shape must look like 1x8x8, got '{s}'")),
    }
}

/// Writes every key, so feeding the text back to [`ExperimentConfig::parse`]
/// reproduces the config exactly.
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset = {}", self.dataset.name())?;
        writeln!(f, "dims = {}", self.dims)?;
        writeln!(f, "classes = {}", self.classes)?;
        writeln!(f, "outputs = {}", self.outputs)?;
        writeln!(f, "n_train = {}", self.n_train)?;
        writeln!(f, "n_val = {}", self.n_val)?;
        writeln!(f, "n_test = {}", self.n_test)?;
        writeln!(f, "noise = {:?}", self.noise)?;
        writeln!(f, "input_scale = {:?}", self.input_scale)?;
        writeln!(f, "data_dir = {}", self.data_dir.as_deref().unwrap_or(""))?;
        writeln!(f, "target_columns = {}", self.target_columns)?;
        writeln!(f, "layers = {}", format_layers(&self.layers))?;
        match self.input_shape {
            Some((c, h, w)) => writeln!(f, "input_shape = {c}x{h}x{w}")?,
            None => writeln!(f, "input_shape = ")?,
        }
        writeln!(f, "loss = {}", self.loss)?;
        match self.regularizer {
            Regularizer::Alr { damping } => {
                writeln!(f, "regularizer = alr")?;
                writeln!(f, "damping = {damping}")?;
            }
            r => writeln!(f, "regularizer = {r}")?,
        }
        writeln!(f, "patience = {}", self.patience)?;
        writeln!(f, "epsilon = {:?}", self.epsilon)?;
        writeln!(f, "step_size = {:?}", self.step_size)?;
        writeln!(f, "batch_size = {}", self.batch_size)?;
        writeln!(f, "max_epochs = {}", self.max_epochs)?;
        writeln!(f, "rank = {}", self.rank)?;
        writeln!(f, "probe_size = {}", self.probe_size)?;
        writeln!(f, "seed = {}", self.seed)
    }
}
