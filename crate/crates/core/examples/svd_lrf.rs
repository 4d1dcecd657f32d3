//! Singular values of a random matrix and the error of its rank-k
//! factorizations, which equals the tail of the spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lowrank_lab::linalg::{lrf, lrf_reconstruct, svd, truncate_to_rank, Matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = Matrix::from_fn(8, 6, |_, _| rng.random_range(-1.0..1.0));
    let dec = svd(&a)?;
    println!("sigma = {:.4?}", dec.sigma);
    println!("rank  = {}", dec.rank());
    for k in 1..dec.rank() {
        let p = lrf(&a, k)?;
        let err = a.sub(&lrf_reconstruct(&p))?.frobenius_norm();
        println!(
            "k={k}: |A - VU|_F = {err:.6}  tail = {:.6}  factors {:?} x {:?}",
            dec.tail_norm(k),
            p.v_factor.shape(),
            p.u_factor.shape()
        );
    }

    // An outer product is already rank one, so truncation leaves it alone.
    let outer = Matrix::from_fn(4, 3, |i, j| (i + 1) as f64 * (j as f64 - 1.5));
    println!(
        "rank-1 input truncated: {}",
        truncate_to_rank(&outer, 1)?.is_some()
    );
    Ok(())
}
