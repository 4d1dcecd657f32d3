//! Loss spike after replacing a trained layer by its rank-1 factorization
//! and the number of epochs needed to recover. Observational only.

use lowrank_lab::oracle::{
    conjecture1_linear, conjecture1_probe, conjecture1_scale_sweep, Conjecture1Config,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Conjecture1Config::default();
    println!("{}", conjecture1_probe(&base)?);
    println!(
        "{}",
        conjecture1_linear(&Conjecture1Config {
            samples: 20_000,
            ..base.clone()
        })?
    );
    println!(
        "{}",
        conjecture1_scale_sweep(&base, &[0.5, 1.0, 2.0], &[0, 1, 2])?
    );
    Ok(())
}
