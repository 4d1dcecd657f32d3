//! A layer kept out of the ALR selection during training, then forced in:
//! one penalized step and the resulting change in train accuracy.
//!
//! Usage: `cargo run --release --example lazy_weight [injection_step]`

use lowrank_lab::oracle::{theorem3_gradient_identity, theorem3_lazy_weight, LazyWeightConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = LazyWeightConfig::default();
    let injection_step = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(base.injection_step);
    println!("{}", theorem3_gradient_identity(5, 0)?);
    for seed in 0..5 {
        let r = theorem3_lazy_weight(&LazyWeightConfig {
            seed,
            injection_step,
            ..base.clone()
        })?;
        println!("{r}");
    }
    Ok(())
}
