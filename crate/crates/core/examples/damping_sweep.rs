//! ALR with each damping sequence on the same data and initialization.
//! Stronger damping pulls more layers into the penalty later in training.

use lowrank_lab::exp::{build_network, dataset_for, parse_layers, ExperimentConfig};
use lowrank_lab::regula::{train_alr, DampingSequence, TrainData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        noise: 0.3,
        layers: parse_layers("dense:64:tanh,dense:64:tanh,dense:3:softmax")?,
        step_size: 0.2,
        max_epochs: 600,
        ..ExperimentConfig::with_seed(1)
    };
    let ds = dataset_for(&cfg)?;
    let data = TrainData {
        train: &ds.train,
        val: &ds.val,
        test: ds.test.as_ref(),
    };
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>12}",
        "damping", "train", "test", "test acc", "selections"
    );
    for ds_kind in DampingSequence::KINDS {
        let mut net = build_network(&cfg, &ds)?;
        let out = train_alr(&mut net, data, &cfg.train_config(), ds_kind, cfg.seed)?;
        let last = out.last();
        let picks: usize = out.trace.iter().map(|m| m.selected.len()).sum();
        println!(
            "{:<14} {:>10.4} {:>10.4} {:>10.3} {:>12}",
            ds_kind.name(),
            last.train_loss,
            last.test_loss.unwrap_or(f64::NAN),
            last.test_acc.unwrap_or(f64::NAN),
            picks
        );
    }
    Ok(())
}
