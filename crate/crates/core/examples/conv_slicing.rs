//! A convolution kernel is regularized slice by slice: one
//! `(fh*fw) x filters` matrix per input channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lowrank_lab::linalg::{slice_tensor, svd, truncate_to_rank, unslice_tensor, Tensor4};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (fh, fw, c, f) = (3, 3, 2, 4);
    let data = (0..fh * fw * c * f)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let kernel = Tensor4::new(fh, fw, c, f, data)?;
    let slices = slice_tensor(&kernel);
    let mut low = Vec::new();
    for (ch, s) in slices.iter().enumerate() {
        let dec = svd(s)?;
        println!("channel {ch}: {:?} sigma {:.4?}", s.shape(), dec.sigma);
        low.push(truncate_to_rank(s, 1)?.unwrap_or_else(|| s.clone()));
    }
    let rebuilt = unslice_tensor(&low, fh, fw)?;
    println!(
        "kernel norm {:.4} -> {:.4} after rank-1 slices",
        kernel.frobenius_norm(),
        rebuilt.frobenius_norm()
    );
    assert_eq!(unslice_tensor(&slices, fh, fw)?, kernel);
    Ok(())
}
