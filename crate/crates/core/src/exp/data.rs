use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Matrix;
use crate::net::SampleBatch;
use crate::seed::{rng_for, Stream};

use super::{DatasetKind, ExpError, ExperimentConfig};

pub const SPLITS: [&str; 3] = ["train", "val", "test"];

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: SampleBatch,
    pub val: SampleBatch,
    /// Empty when the config asks for no test samples.
    pub test: Option<SampleBatch>,
}

impl Dataset {
    pub fn input_len(&self) -> usize {
        self.train.input_len()
    }

    pub fn target_len(&self) -> usize {
        self.train.target_len()
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn one_hot(class: usize, classes: usize) -> Vec<f64> {
    let mut y = vec![0.0; classes];
    y[class] = 1.0;
    y
}

// Per-class feature means and standard deviations of Fisher's iris data
// (sepal length, sepal width, petal length, petal width).
const IRIS_MEAN: [[f64; 4]; 3] = [
    [5.006, 3.428, 1.462, 0.246],
    [5.936, 2.770, 4.260, 1.326],
    [6.588, 2.974, 5.552, 2.026],
];
const IRIS_STD: [[f64; 4]; 3] = [
    [0.352, 0.379, 0.174, 0.105],
    [0.516, 0.314, 0.470, 0.198],
    [0.636, 0.322, 0.552, 0.275],
];
// Standard deviation of each feature over all three classes together.
const IRIS_SPREAD: [f64; 4] = [0.828, 0.436, 1.765, 0.762];

/// Generates the configured synthetic dataset from the data stream of the
/// seed.
///
/// Noise draws are made whether or not the noise level is zero, so the
/// clean dataset is exactly the noisy one at noise 0.
///
/// * `gaussian-regression`: `x ~ N(0, s^2 I)`, `y = W x + noise * e` with a
///   fixed random `W` (entries `N(0, 1/dims)`).
/// * `separable-classification`: well separated Gaussian classes; a
///   fraction `noise` of train/val labels is reassigned to a random other
///   class.
/// * `noisy-iris-like`: four-feature, three-class Gaussians shaped like the
///   iris measurements, centred with the pooled means. Train and val
///   features get additive noise with `noise` times each feature's spread,
///   and a fraction `noise / 2` of their labels is reassigned. The test split
///   stays clean.
pub fn gen_synthetic(cfg: &ExperimentConfig) -> Result<Dataset, ExpError> {
    let mut rng = rng_for(cfg.seed, Stream::Data);
    let sizes = [cfg.n_train, cfg.n_val, cfg.n_test];
    let mut splits: Vec<SampleBatch> = Vec::with_capacity(3);
    match cfg.dataset {
        DatasetKind::GaussianRegression => {
            let s = 1.0 / (cfg.dims as f64).sqrt();
            let w = Matrix::from_fn(cfg.outputs, cfg.dims, |_, _| s * normal(&mut rng));
            for n in sizes {
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    let x: Vec<f64> = (0..cfg.dims)
                        .map(|_| cfg.input_scale * normal(&mut rng))
                        .collect();
                    let mut y = w.matvec(&x)?;
                    y.iter_mut()
                        .for_each(|v| *v += cfg.noise * normal(&mut rng));
                    xs.push(x);
                    ys.push(y);
                }
                splits.push(batch(xs, ys)?);
            }
        }
        DatasetKind::SeparableClassification => {
            let centres: Vec<Vec<f64>> = (0..cfg.classes)
                .map(|_| {
                    (0..cfg.dims)
                        .map(|_| 3.0 * cfg.input_scale * normal(&mut rng))
                        .collect()
                })
                .collect();
            for (split, n) in sizes.into_iter().enumerate() {
                let noisy = split < 2;
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for i in 0..n {
                    let c = i % cfg.classes;
                    xs.push(
                        centres[c]
                            .iter()
                            .map(|m| m + 0.5 * cfg.input_scale * normal(&mut rng))
                            .collect(),
                    );
                    let flip: f64 = rng.random();
                    let other = (c + rng.random_range(1..cfg.classes)) % cfg.classes;
                    let label = if noisy && flip < cfg.noise { other } else { c };
                    ys.push(one_hot(label, cfg.classes));
                }
                splits.push(batch(xs, ys)?);
            }
        }
        DatasetKind::NoisyIrisLike => {
            let centre: Vec<f64> = (0..4)
                .map(|j| IRIS_MEAN.iter().map(|m| m[j]).sum::<f64>() / 3.0)
                .collect();
            for (split, n) in sizes.into_iter().enumerate() {
                let noisy = split < 2;
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for i in 0..n {
                    let c = i % 3;
                    let x: Vec<f64> = (0..4)
                        .map(|j| {
                            let clean =
                                IRIS_MEAN[c][j] + IRIS_STD[c][j] * normal(&mut rng) - centre[j];
                            let e = normal(&mut rng);
                            if noisy {
                                clean + cfg.noise * IRIS_SPREAD[j] * e
                            } else {
                                clean
                            }
                        })
                        .collect();
                    let flip: f64 = rng.random();
                    let other = (c + rng.random_range(1..3)) % 3;
                    let label = if noisy && flip < cfg.noise / 2.0 {
                        other
                    } else {
                        c
                    };
                    xs.push(x);
                    ys.push(one_hot(label, 3));
                }
                splits.push(batch(xs, ys)?);
            }
        }
        DatasetKind::Csv => {
            return Err(ExpError::Config {
                line: None,
                msg: "dataset 'csv' is loaded from files, not generated".into(),
            })
        }
    }
    let test = splits.pop().filter(|t| !t.is_empty());
    let val = splits.pop().expect("val");
    let train = splits.pop().expect("train");
    Ok(Dataset { train, val, test })
}

fn batch(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Result<SampleBatch, ExpError> {
    if xs.is_empty() {
        return Ok(SampleBatch {
            inputs: xs,
            targets: ys,
        });
    }
    Ok(SampleBatch::new(xs, ys)?)
}

/// Writes `train.csv`, `val.csv` and (if present) `test.csv` with header
/// `x0..x{d-1},y0..y{m-1}`. Values use Rust's shortest round-trip float
/// formatting, so reading them back is bit exact.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
    for (name, split) in SPLITS
        .iter()
        .zip([Some(&ds.train), Some(&ds.val), ds.test.as_ref()])
    {
        if let Some(split) = split {
            write_split(split, &dir.join(format!("{name}.csv")))?;
        }
    }
    Ok(())
}

pub fn write_split(split: &SampleBatch, path: &Path) -> Result<(), ExpError> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| ExpError::csv(path, None, e.to_string()))?;
    let d = split.inputs.first().map_or(0, Vec::len);
    let m = split.targets.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..d)
        .map(|j| format!("x{j}"))
        .chain((0..m).map(|j| format!("y{j}")))
        .collect();
    let werr = |e: csv::Error| ExpError::csv(path, None, e.to_string());
    w.write_record(&header).map_err(werr)?;
    for (x, y) in split.inputs.iter().zip(&split.targets) {
        w.write_record(x.iter().chain(y).map(|v| format!("{v:?}")))
            .map_err(werr)?;
    }
    w.flush().map_err(|e| ExpError::io(path, e))
}

/// Reads one CSV split: a header row, then feature columns followed by
/// `target_columns` target columns. Errors name the offending line.
pub fn load_csv(path: &Path, target_columns: usize) -> Result<SampleBatch, ExpError> {
    let text = fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ExpError::csv(path, Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() || text.trim().is_empty() {
        return Err(ExpError::csv(path, Some(1), "empty file".into()));
    }
    let width = headers.len();
    if width <= target_columns {
        return Err(ExpError::csv(
            path,
            Some(1),
            format!("{width} columns leave no features with {target_columns} target columns"),
        ));
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            ExpError::csv(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                ExpError::csv(
                    path,
                    Some(line),
                    format!(
                        "column {} ('{}'): '{cell}' is not a number",
                        j + 1,
                        &headers[j]
                    ),
                )
            })?;
            row.push(v);
        }
        let y = row.split_off(width - target_columns);
        inputs.push(row);
        targets.push(y);
    }
    if inputs.is_empty() {
        return Err(ExpError::csv(path, Some(1), "no data rows".into()));
    }
    Ok(SampleBatch::new(inputs, targets)?)
}

/// Per-feature mean and standard deviation, fitted on one split.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Constant features keep a unit scale.
    pub fn fit(batch: &SampleBatch) -> Self {
        let d = batch.input_len();
        let n = batch.len() as f64;
        let mut mean = vec![0.0; d];
        for x in &batch.inputs {
            mean.iter_mut().zip(x).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; d];
        for x in &batch.inputs {
            var.iter_mut()
                .zip(x.iter().zip(&mean))
                .for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
        }
        let std = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, batch: &mut SampleBatch) {
        for x in &mut batch.inputs {
            for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
    }
}

/// Loads `train.csv`, `val.csv` and optional `test.csv` from `dir`,
/// normalizing features with the train split's statistics when asked.
pub fn load_splits(
    dir: &Path,
    target_columns: usize,
    normalize: bool,
) -> Result<Dataset, ExpError> {
    let mut train = load_csv(&dir.join("train.csv"), target_columns)?;
    let mut val = load_csv(&dir.join("val.csv"), target_columns)?;
    let test_path = dir.join("test.csv");
    let mut test = if test_path.exists() {
        Some(load_csv(&test_path, target_columns)?)
    } else {
        None
    };
    for other in std::iter::once(&val).chain(test.as_ref()) {
        if other.input_len() != train.input_len() || other.target_len() != train.target_len() {
            return Err(ExpError::csv(
                dir,
                None,
                "splits disagree on column counts".into(),
            ));
        }
    }
    if normalize {
        let norm = Normalizer::fit(&train);
        norm.apply(&mut train);
        norm.apply(&mut val);
        if let Some(t) = test.as_mut() {
            norm.apply(t);
        }
    }
    Ok(Dataset { train, val, test })
}

/// The dataset a config refers to: generated, or loaded and normalized.
pub fn dataset_for(cfg: &ExperimentConfig) -> Result<Dataset, ExpError> {
    match cfg.dataset {
        DatasetKind::Csv => {
            let dir = cfg.data_dir.as_deref().expect("validated");
            load_splits(Path::new(dir), cfg.target_columns, true)
        }
        _ => gen_synthetic(cfg),
    }
}
