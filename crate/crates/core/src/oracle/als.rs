use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{LrfPair, Matrix};

use super::dense::{cholesky_solve, gaussian};
use super::OracleError;

/// Rank-`k` factorization by alternating least squares, best of `restarts`
/// random initializations. Used only as a reference for the truncated-SVD
/// factorization; it never calls the SVD.
///
/// Each half-step solves the normal equations exactly:
/// `U = (V^T V)^{-1} V^T A`, then `V = A U^T (U U^T)^{-1}`. A restart whose
/// normal equations turn singular is abandoned.
pub fn als_lrf_oracle(
    a: &Matrix,
    k: usize,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<LrfPair, OracleError> {
    let (n, m) = a.shape();
    if k == 0 || k >= n.min(m) {
        return Err(OracleError::InvalidRank {
            k,
            rows: n,
            cols: m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, LrfPair)> = None;
    for _ in 0..restarts.max(1) {
        let mut v = Matrix::from_fn(n, k, |_, _| gaussian(&mut rng));
        let mut u = Matrix::zeros(k, m);
        let mut ok = true;
        let mut last = f64::INFINITY;
        for _ in 0..iterations.max(1) {
            let vt = v.transpose();
            let Some(ut) = cholesky_solve(&vt.matmul(&v)?, &vt.matmul(a)?) else {
                ok = false;
                break;
            };
            u = ut;
            // V^T = (U U^T)^{-1} U A^T
            let Some(vt_new) =
                cholesky_solve(&u.matmul(&u.transpose())?, &u.matmul(&a.transpose())?)
            else {
                ok = false;
                break;
            };
            v = vt_new.transpose();
            let res = a.sub(&v.matmul(&u)?)?.frobenius_norm();
            if (last - res).abs() <= 1e-15 * res.max(1e-300) {
                break;
            }
            last = res;
        }
        if !ok {
            continue;
        }
        let res = a.sub(&v.matmul(&u)?)?.frobenius_norm();
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((
                res,
                LrfPair {
                    v_factor: v,
                    u_factor: u,
                    k,
                },
            ));
        }
    }
    best.map(|(_, p)| p).ok_or(OracleError::AllRestartsFailed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lrf_reconstruct;

    fn residual(a: &Matrix, p: &LrfPair) -> f64 {
        a.sub(&lrf_reconstruct(p)).unwrap().frobenius_norm()
    }

    #[test]
    fn diagonal_matches_tail() {
        let a = Matrix::from_diag(&[3.0, 2.0, 1.0]);
        let p = als_lrf_oracle(&a, 2, 5, 200, 1).unwrap();
        assert!((residual(&a, &p) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_invalid_rank() {
        let a = Matrix::identity(3);
        assert!(als_lrf_oracle(&a, 3, 1, 1, 0).is_err());
        assert!(als_lrf_oracle(&a, 0, 1, 1, 0).is_err());
    }
}
