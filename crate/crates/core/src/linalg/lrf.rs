use super::svd::{svd, SvdResult};
use super::{LinalgError, Matrix};

/// Rank-`k` factorization `a ≈ v_factor · u_factor`.
#[derive(Clone, Debug)]
pub struct LrfPair {
    /// `n x k`
    pub v_factor: Matrix,
    /// `k x m`
    pub u_factor: Matrix,
    pub k: usize,
}

/// Best rank-`k` factorization in Frobenius norm, via truncated SVD.
///
/// `v_factor = U_k diag(sigma_k)`, `u_factor = V_k^T`. Requires
/// `1 <= k < rank(a)`.
pub fn lrf(a: &Matrix, k: usize) -> Result<LrfPair, LinalgError> {
    let dec = svd(a)?;
    lrf_from_svd(&dec, k)
}

pub fn lrf_from_svd(dec: &SvdResult, k: usize) -> Result<LrfPair, LinalgError> {
    let rank = dec.rank();
    if k == 0 || k >= rank {
        return Err(LinalgError::InvalidRank { k, rank });
    }
    let v_factor = Matrix::from_fn(dec.u.rows(), k, |i, t| dec.u[(i, t)] * dec.sigma[t]);
    let u_factor = Matrix::from_fn(k, dec.v.rows(), |t, j| dec.v[(j, t)]);
    Ok(LrfPair {
        v_factor,
        u_factor,
        k,
    })
}

pub fn lrf_reconstruct(p: &LrfPair) -> Matrix {
    p.v_factor
        .matmul(&p.u_factor)
        .expect("LrfPair factors have matching inner dimension")
}

/// Numerical rank: singular values above `1e-10 * sigma_max`.
pub fn rank(a: &Matrix) -> Result<usize, LinalgError> {
    Ok(svd(a)?.rank())
}

/// Rank-`k` truncation that passes matrices of rank `<= k` through
/// unchanged. Returns `None` in that case so callers can tell whether a
/// substitution happened.
pub fn truncate_to_rank(a: &Matrix, k: usize) -> Result<Option<Matrix>, LinalgError> {
    let dec = svd(a)?;
    if dec.rank() <= k {
        return Ok(None);
    }
    Ok(Some(lrf_reconstruct(&lrf_from_svd(&dec, k)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_rank_two_diagonal_to_rank_one() {
        let a = Matrix::from_diag(&[1.0, 1e-3]);
        let p = lrf(&a, 1).unwrap();
        let res = a.sub(&lrf_reconstruct(&p)).unwrap().frobenius_norm();
        assert!((res - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn diag_truncation() {
        let a = Matrix::from_diag(&[3.0, 2.0, 1.0]);
        let p = lrf(&a, 2).unwrap();
        assert_eq!((p.v_factor.shape(), p.u_factor.shape()), ((3, 2), (2, 3)));
        let r = lrf_reconstruct(&p);
        assert!(
            r.sub(&Matrix::from_diag(&[3.0, 2.0, 0.0]))
                .unwrap()
                .frobenius_norm()
                < 1e-15
        );
        assert!((a.sub(&r).unwrap().frobenius_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_k_at_or_above_rank() {
        let a = Matrix::from_diag(&[3.0, 2.0, 0.0]);
        assert!(matches!(
            lrf(&a, 2),
            Err(LinalgError::InvalidRank { k: 2, rank: 2 })
        ));
        assert!(matches!(lrf(&a, 0), Err(LinalgError::InvalidRank { .. })));
    }

    #[test]
    fn rank_one_truncation_is_noop() {
        let a = Matrix::from_fn(3, 4, |i, j| (i + 1) as f64 * (j as f64 - 2.0));
        assert!(truncate_to_rank(&a, 1).unwrap().is_none());
        let b = Matrix::from_diag(&[2.0, 1.0]);
        let t = truncate_to_rank(&b, 1).unwrap().unwrap();
        assert_eq!(rank(&t).unwrap(), 1);
    }
}
