use serde::Serialize;

use crate::regula::Regularizer;

use super::{dataset_for, run_on, ExpError, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; 0 for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// `(train_loss, test_loss, train_acc, test_acc)` of one seed.
pub type SeedResult = (f64, f64, Option<f64>, Option<f64>);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub train_loss: MeanStd,
    pub test_loss: MeanStd,
    pub train_acc: Option<MeanStd>,
    pub test_acc: Option<MeanStd>,
    /// Final metrics per seed, in seed order.
    pub per_seed: Vec<SeedResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "config",
            "train_loss_mean",
            "train_loss_std",
            "test_loss_mean",
            "test_loss_std",
            "train_acc_mean",
            "train_acc_std",
            "test_acc_mean",
            "test_acc_std",
        ])
        .expect("in-memory write");
        let f = |v: f64| format!("{v:.6}");
        let o = |m: Option<MeanStd>| match m {
            Some(m) => [f(m.mean), f(m.std)],
            None => [String::new(), String::new()],
        };
        for r in &self.rows {
            let [ta, tas] = o(r.train_acc);
            let [sa, sas] = o(r.test_acc);
            w.write_record([
                r.label.clone(),
                f(r.train_loss.mean),
                f(r.train_loss.std),
                f(r.test_loss.mean),
                f(r.test_loss.std),
                ta,
                tas,
                sa,
                sas,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }

    /// Fixed-width text rendering of the same table.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut s = format!(
            "{:width$}  {:>19}  {:>19}  {:>17}  {:>17}\n",
            "config", "train loss", "test loss", "train acc", "test acc"
        );
        let pm = |m: MeanStd, p: usize| format!("{:.p$} +- {:.p$}", m.mean, m.std);
        for r in &self.rows {
            let acc = |m: Option<MeanStd>| m.map(|m| pm(m, 4)).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:width$}  {:>19}  {:>19}  {:>17}  {:>17}\n",
                r.label,
                pm(r.train_loss, 5),
                pm(r.test_loss, 5),
                acc(r.train_acc),
                acc(r.test_acc)
            ));
        }
        s
    }
}

/// The part of a config that must agree across compared runs.
fn fixed_part(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        regularizer: Regularizer::None,
        seed: 0,
        ..cfg.clone()
    }
}

/// Runs every config under every seed and tabulates final metrics. Configs
/// may differ only in regularizer and damping; anything else makes the
/// comparison unfair and is rejected. Test metrics fall back to validation
/// metrics when there is no test split.
pub fn compare(configs: &[ExperimentConfig], seeds: &[u64]) -> Result<ComparisonTable, ExpError> {
    if configs.len() < 2 {
        return Err(ExpError::Incomparable("need at least two configs".into()));
    }
    if seeds.is_empty() {
        return Err(ExpError::Incomparable("need at least one seed".into()));
    }
    let base = fixed_part(&configs[0]);
    for (i, c) in configs.iter().enumerate().skip(1) {
        c.validate()?;
        if fixed_part(c) != base {
            return Err(ExpError::Incomparable(format!(
                "config {} differs from config 1 in more than regularizer/damping",
                i + 1
            )));
        }
    }
    configs[0].validate()?;

    let mut per_config: Vec<Vec<SeedResult>> = vec![Vec::new(); configs.len()];
    for &seed in seeds {
        let ds = dataset_for(&ExperimentConfig {
            seed,
            ..configs[0].clone()
        })?;
        for (i, c) in configs.iter().enumerate() {
            let cfg = ExperimentConfig { seed, ..c.clone() };
            let out = run_on(&cfg, &ds, None)?;
            let m = out.report.final_metrics.expect("at least one epoch");
            per_config[i].push((
                m.train_loss,
                m.test_loss.unwrap_or(m.val_loss),
                m.train_acc,
                m.test_acc.or(m.val_acc),
            ));
        }
    }
    let rows = configs
        .iter()
        .zip(per_config)
        .map(|(c, vals)| {
            let col = |f: fn(&SeedResult) -> Option<f64>| -> Option<MeanStd> {
                let v: Option<Vec<f64>> = vals.iter().map(f).collect();
                v.map(|v| MeanStd::of(&v))
            };
            ComparisonRow {
                label: c.label(),
                train_loss: col(|r| Some(r.0)).expect("always present"),
                test_loss: col(|r| Some(r.1)).expect("always present"),
                train_acc: col(|r| r.2),
                test_acc: col(|r| r.3),
                per_seed: vals,
            }
        })
        .collect();
    Ok(ComparisonTable {
        seeds: seeds.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp::DatasetKind;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            n_train: 30,
            n_val: 30,
            n_test: 30,
            max_epochs: 5,
            ..ExperimentConfig::with_seed(0)
        }
    }

    #[test]
    fn identical_configs_give_identical_rows() {
        let t = compare(&[base(), base()], &[1, 2]).unwrap();
        assert_eq!(t.rows[0], t.rows[1]);
        assert_eq!(t.to_csv().lines().count(), 3);
    }

    #[test]
    fn rejects_unfair_comparisons() {
        let other = ExperimentConfig {
            dataset: DatasetKind::SeparableClassification,
            ..base()
        };
        assert!(matches!(
            compare(&[base(), other], &[1]),
            Err(ExpError::Incomparable(_))
        ));
        assert!(compare(&[base()], &[1]).is_err());
    }

    #[test]
    fn mean_std() {
        let m = MeanStd::of(&[1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 2f64.sqrt()).abs() < 1e-15);
    }
}
