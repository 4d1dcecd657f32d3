//! Table of final train/test loss and accuracy for several regularizers on
//! the same data and model, averaged over seeds.
//!
//! Usage: `cargo run --release --example compare_regularizers [key=value ...]`
//! where the pairs override the base config (e.g. `noise=0.3 max_epochs=300`).

use lowrank_lab::exp::{compare, ExperimentConfig};
use lowrank_lab::regula::{DampingSequence, Regularizer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut text = String::from("seed = 0\ndataset = noisy-iris-like\nnoise = 0.3\n");
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').ok_or("overrides look like key=value")?;
        text = text
            .lines()
            .filter(|l| l.split('=').next().map(str::trim) != Some(k))
            .map(|l| format!("{l}\n"))
            .collect();
        text.push_str(&format!("{k} = {v}\n"));
    }
    let base = ExperimentConfig::parse(&text)?;
    let configs: Vec<ExperimentConfig> = [
        Regularizer::None,
        Regularizer::Dlr,
        Regularizer::Alr {
            damping: DampingSequence::InvLog,
        },
        Regularizer::Dropout { rate: 0.2 },
        Regularizer::WeightDecay { lambda: 1e-3 },
    ]
    .into_iter()
    .map(|regularizer| ExperimentConfig {
        regularizer,
        ..base.clone()
    })
    .collect();
    let table = compare(&configs, &[0, 1, 2, 3, 4])?;
    print!("{}", table.to_text());
    for row in &table.rows {
        let tests: Vec<String> = row.per_seed.iter().map(|s| format!("{:.4}", s.1)).collect();
        println!("{:>16} test loss per seed: {}", row.label, tests.join(" "));
    }
    Ok(())
}
