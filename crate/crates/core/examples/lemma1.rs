//! Zero-loss linear classifiers on a few prototype layouts, then the
//! 100-dataset sweep.

use lowrank_lab::oracle::{lemma1_check, lemma1_sweep, Lemma1Config, PrototypeLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for layout in [
        PrototypeLayout::Random,
        PrototypeLayout::Orthogonal,
        PrototypeLayout::NearCollinear,
    ] {
        let cfg = Lemma1Config {
            layout,
            ..Lemma1Config::new(3, 12, 0)
        };
        println!("{}", lemma1_check(&cfg)?);
    }
    let sweep = lemma1_sweep(100, 0)?;
    println!(
        "sweep: {:?}, smallest sigma_2/sigma_1 {:.3e}",
        sweep.verdict,
        sweep
            .values_of("sigma_2_over_sigma_1")
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    );
    Ok(())
}
