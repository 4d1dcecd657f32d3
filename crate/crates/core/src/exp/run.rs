use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::net::Network;
use crate::oracle::TheoremReport;
use crate::regula::{train, EpochMetrics, RegError, StopReason, TrainData};
use crate::seed::{rng_for, Stream};

use super::{dataset_for, Dataset, ExpError, ExperimentConfig};

pub const METRICS_FILE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.txt";

pub const METRICS_HEADER: [&str; 16] = [
    "epoch",
    "train_loss",
    "val_loss",
    "test_loss",
    "train_acc",
    "val_acc",
    "test_acc",
    "v",
    "v_mean",
    "overfit_triggered",
    "sncn",
    "grad_norm",
    "gamma",
    "kappa",
    "selected",
    "substituted",
];

fn float(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// Metrics trace as CSV text with [`METRICS_HEADER`]. Per-layer columns are
/// `;`-separated lists.
pub fn metrics_csv(trace: &[EpochMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).expect("in-memory write");
    for m in trace {
        let gamma: Vec<String> = m.gamma.iter().map(|&g| float(g)).collect();
        let kappa: Vec<String> = m.kappa.iter().map(|&k| float(k)).collect();
        w.write_record([
            m.epoch.to_string(),
            float(m.train_loss),
            float(m.val_loss),
            opt(m.test_loss),
            opt(m.train_acc),
            opt(m.val_acc),
            opt(m.test_acc),
            float(m.v),
            float(m.v_mean),
            m.overfit_triggered.to_string(),
            float(m.sncn),
            float(m.grad_norm),
            list(&gamma),
            list(&kappa),
            list(&m.selected),
            list(&m.substituted),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    /// The config in its `key = value` form; parsing it reruns the experiment.
    pub config: String,
    pub label: String,
    pub seed: u64,
    pub parameters: usize,
    pub train_samples: usize,
    pub epochs: usize,
    pub stop: Option<StopReason>,
    /// Set when training diverged.
    pub failure: Option<String>,
    pub final_metrics: Option<EpochMetrics>,
    pub metrics_file: String,
    pub oracle: Vec<TheoremReport>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub trace: Vec<EpochMetrics>,
    pub network: Network,
}

impl RunOutput {
    pub fn metrics_csv(&self) -> String {
        metrics_csv(&self.trace)
    }
}

/// Builds the model for `cfg` on `ds`, checking that its input and output
/// widths match the data.
pub fn build_network(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Network, ExpError> {
    let shape = cfg.input_shape_for(ds.input_len());
    if shape.len() != ds.input_len() {
        return Err(ExpError::Config {
            line: None,
            msg: format!(
                "input_shape holds {} values but samples have {}",
                shape.len(),
                ds.input_len()
            ),
        });
    }
    let net =
        Network::init(shape, &cfg.layers, &mut rng_for(cfg.seed, Stream::Init)).map_err(|e| {
            ExpError::Config {
                line: None,
                msg: format!("layers: {e}"),
            }
        })?;
    if net.output_len() != ds.target_len() {
        return Err(ExpError::Config {
            line: None,
            msg: format!(
                "network outputs {} values but targets have {}",
                net.output_len(),
                ds.target_len()
            ),
        });
    }
    Ok(net)
}

/// Runs one experiment. With `out_dir`, writes `metrics.csv`, `report.json`
/// and `config.txt` there; the metrics of a diverged run are still written
/// before the error is returned.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutput, ExpError> {
    cfg.validate()?;
    let ds = dataset_for(cfg)?;
    run_on(cfg, &ds, out_dir)
}

/// [`run`] on an already materialized dataset.
pub fn run_on(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    out_dir: Option<&Path>,
) -> Result<RunOutput, ExpError> {
    let mut net = build_network(cfg, ds)?;
    let data = TrainData {
        train: &ds.train,
        val: &ds.val,
        test: ds.test.as_ref(),
    };
    let result = train(&mut net, data, &cfg.train_config(), cfg.seed, &mut |_| {});
    let (trace, stop, failure) = match result {
        Ok(o) => (o.trace, Some(o.stop), None),
        Err(RegError::Diverged {
            epoch,
            reason,
            trace,
        }) => (
            trace,
            None,
            Some(format!("diverged at epoch {epoch}: {reason}")),
        ),
        Err(e) => return Err(e.into()),
    };
    let report = RunReport {
        config: cfg.to_string(),
        label: cfg.label(),
        seed: cfg.seed,
        parameters: net.param_count(),
        train_samples: ds.train.len(),
        epochs: trace.len(),
        stop,
        failure: failure.clone(),
        final_metrics: trace.last().cloned(),
        metrics_file: METRICS_FILE.into(),
        oracle: Vec::new(),
    };
    let out = RunOutput {
        report,
        trace,
        network: net,
    };
    if let Some(dir) = out_dir {
        write_run(&out, cfg, dir)?;
    }
    match failure {
        Some(reason) => Err(ExpError::Numeric(reason)),
        None => Ok(out),
    }
}

pub fn write_run(out: &RunOutput, cfg: &ExperimentConfig, dir: &Path) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| ExpError::io(&p, e))
    };
    write(METRICS_FILE, out.metrics_csv())?;
    write(CONFIG_FILE, cfg.to_string())?;
    let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    write(REPORT_FILE, json + "\n")
}
