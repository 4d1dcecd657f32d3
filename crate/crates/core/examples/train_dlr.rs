//! DLR on the noisy iris-like data: epochs where the overfitting test fired
//! and which layers were replaced by their rank-1 factorization.

use lowrank_lab::exp::{build_network, dataset_for, parse_layers, ExperimentConfig};
use lowrank_lab::regula::{evaluate, train_dlr, TrainData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        noise: 0.3,
        layers: parse_layers("dense:64:tanh,dense:64:tanh,dense:3:softmax")?,
        step_size: 0.2,
        max_epochs: 1000,
        ..ExperimentConfig::with_seed(0)
    };
    let ds = dataset_for(&cfg)?;
    let mut net = build_network(&cfg, &ds)?;
    let data = TrainData {
        train: &ds.train,
        val: &ds.val,
        test: ds.test.as_ref(),
    };
    let out = train_dlr(&mut net, data, &cfg.train_config(), cfg.seed)?;
    let fired: Vec<_> = out.trace.iter().filter(|m| m.overfit_triggered).collect();
    println!("overfitting test fired in {} epochs", fired.len());
    for m in out
        .trace
        .iter()
        .filter(|m| !m.substituted.is_empty())
        .take(20)
    {
        println!(
            "epoch {:>4}: v_mean {:.4} gamma {:.3?} -> substituted {:?}",
            m.epoch, m.v_mean, m.gamma, m.substituted
        );
    }
    let test = ds.test.as_ref().expect("synthetic data has a test split");
    let (loss, acc) = evaluate(&net, test, cfg.loss)?;
    println!(
        "test loss {loss:.4}, test accuracy {:.3}",
        acc.unwrap_or(f64::NAN)
    );
    Ok(())
}
