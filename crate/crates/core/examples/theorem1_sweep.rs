//! Rank-k substitution of a trained linear map followed by one retraining
//! step, for every k. Prints the exact-expectation and sampled variants.

use lowrank_lab::oracle::{theorem1_empirical, theorem1_exact, Theorem1Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);
    let cfg = Theorem1Config {
        seed,
        ..Theorem1Config::default()
    };
    println!("{}", theorem1_exact(&cfg)?);
    println!("{}", theorem1_empirical(&cfg)?);
    Ok(())
}
