//! Runs one experiment config file and prints a thinned metric trace.
//!
//! Usage: `cargo run --release --example run_config -- <config file> [out dir]`

use std::path::Path;

use lowrank_lab::exp::{run, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .ok_or("usage: run_config <config file> [out dir]")?;
    let cfg = ExperimentConfig::parse(&std::fs::read_to_string(path)?)?;
    let out_dir = args.next();
    let out = run(&cfg, out_dir.as_deref().map(Path::new))?;
    let step = (out.trace.len() / 20).max(1);
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}  subs/selected",
        "epoch", "train", "val", "test", "v_mean", "tr_acc", "te_acc"
    );
    for m in out
        .trace
        .iter()
        .filter(|m| (m.epoch as usize).is_multiple_of(step) || m.epoch == 1)
    {
        println!(
            "{:>6} {:>10.5} {:>10.5} {:>10.5} {:>8.4} {:>8.4} {:>8.4}  {:?}/{:?}",
            m.epoch,
            m.train_loss,
            m.val_loss,
            m.test_loss.unwrap_or(f64::NAN),
            m.v_mean,
            m.train_acc.unwrap_or(f64::NAN),
            m.test_acc.unwrap_or(f64::NAN),
            m.substituted,
            m.selected,
        );
    }
    println!(
        "stop: {:?} after {} epochs",
        out.report.stop,
        out.trace.len()
    );
    Ok(())
}
