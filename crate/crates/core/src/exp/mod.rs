//! Experiment plumbing: configs, synthetic and CSV datasets, single runs
//! with metric traces, and multi-seed comparisons.

mod compare;
mod config;
mod data;
mod run;

pub use compare::{compare, ComparisonRow, ComparisonTable, MeanStd, SeedResult};
pub use config::{format_layers, parse_layers, DatasetKind, ExperimentConfig};
pub use data::{
    dataset_for, gen_synthetic, load_csv, load_splits, write_dataset, write_split, Dataset,
    Normalizer, SPLITS,
};
pub use run::{
    build_network, metrics_csv, run, run_on, write_run, RunOutput, RunReport, CONFIG_FILE,
    METRICS_FILE, METRICS_HEADER, REPORT_FILE,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::net::NetError;
use crate::oracle::OracleError;
use crate::regula::RegError;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("config{}: {msg}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}{}: {msg}", path.display(), line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Csv {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },
    #[error("cannot compare: {0}")]
    Incomparable(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Train(#[from] RegError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl ExpError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExpError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, line: Option<usize>, msg: String) -> Self {
        ExpError::Csv {
            path: path.to_path_buf(),
            line,
            msg,
        }
    }

    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Numeric(_)
            | ExpError::Train(RegError::Diverged { .. })
            | ExpError::Net(NetError::NonFiniteParameter { .. })
            | ExpError::Linalg(LinalgError::NoConvergence { .. }) => 2,
            ExpError::Oracle(OracleError::Singular(_) | OracleError::AllRestartsFailed) => 2,
            _ => 1,
        }
    }
}
