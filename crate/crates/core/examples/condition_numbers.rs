//! Matrix condition numbers of Hilbert matrices, then the per-layer
//! condition numbers, their normalized profile and SNCN of a small network
//! before and after training.

use lowrank_lab::exp::{build_network, dataset_for, ExperimentConfig};
use lowrank_lab::linalg::{matrix_condition_number, Matrix};
use lowrank_lab::regula::{gamma_profile, sncn, train, TrainData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 2..=8 {
        let h = Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        println!("hilbert({n}): kappa = {:.3e}", matrix_condition_number(&h));
    }

    let cfg = ExperimentConfig {
        max_epochs: 300,
        step_size: 0.1,
        ..ExperimentConfig::with_seed(0)
    };
    let ds = dataset_for(&cfg)?;
    let mut net = build_network(&cfg, &ds)?;
    let probe = &ds.val.inputs[..cfg.probe_size.min(ds.val.len())];
    let before = gamma_profile(&net, probe)?;
    let data = TrainData {
        train: &ds.train,
        val: &ds.val,
        test: ds.test.as_ref(),
    };
    train(&mut net, data, &cfg.train_config(), cfg.seed, &mut |_| {})?;
    let after = gamma_profile(&net, probe)?;
    for (tag, p) in [("init", &before), ("trained", &after)] {
        println!(
            "{tag:>8}: kappa {:.4?} gamma {:.4?} sncn {:.4}",
            p.kappa,
            p.gamma,
            sncn(p)
        );
    }
    Ok(())
}
