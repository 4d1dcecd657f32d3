//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! For an `m x n` input with `m >= n` the columns of a working copy are
//! orthogonalized pairwise; the accumulated rotations form `V`, the column
//! norms are the singular values and the normalized columns form `U`.
//! Wide inputs are handled through the transpose.

use super::{LinalgError, Matrix};

/// Relative off-diagonal tolerance: a column pair is treated as orthogonal
/// once `|<a_p, a_q>| <= JACOBI_TOL * |a_p| |a_q|`.
pub const JACOBI_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 60;

/// Relative threshold below which a singular value counts as zero when
/// determining numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Thin singular value decomposition `a = u * diag(sigma) * v^T`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows x p`, orthonormal columns.
    pub u: Matrix,
    /// Nonincreasing, length `p = min(rows, cols)`.
    pub sigma: Vec<f64>,
    /// `cols x p`, orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    /// Number of singular values above `RANK_TOL * sigma_max`.
    pub fn rank(&self) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > RANK_TOL * smax).count()
    }

    /// `u[:, ..k] * diag(sigma[..k]) * v[:, ..k]^T`
    pub fn reconstruct_rank(&self, k: usize) -> Matrix {
        let k = k.min(self.sigma.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for t in 0..k {
            let s = self.sigma[t];
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, t)] * s;
                if ui == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, t)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_rank(self.sigma.len())
    }

    /// `sqrt(sum_{i >= k} sigma_i^2)`: the Frobenius error of the best
    /// rank-`k` approximation.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.sigma.iter().skip(k).map(|s| s * s).sum::<f64>().sqrt()
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult, LinalgError> {
    if let Some(pos) = a.data().iter().position(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite {
            row: pos / a.cols(),
            col: pos % a.cols(),
        });
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

fn jacobi_tall(a: &Matrix) -> Result<SvdResult, LinalgError> {
    let (m, n) = a.shape();
    // Column-major working copies make the column rotations contiguous.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma[0];
    let zero_tol = smax * f64::EPSILON * (m.max(n) as f64);

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s > zero_tol && s > 0.0 {
            ucols.push(cols[j].iter().map(|x| x / s).collect());
        } else {
            ucols.push(vec![0.0; m]);
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        complete_basis(&mut ucols, &missing, m);
    }

    let u = Matrix::from_fn(m, n, |i, t| ucols[t][i]);
    let v = Matrix::from_fn(n, n, |i, t| vcols[order[t]][i]);
    Ok(SvdResult { u, sigma, v })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the zero columns at `missing` with unit vectors orthogonal to all
/// other columns. Standard basis vectors are taken in order, orthogonalized
/// by two passes of modified Gram-Schmidt and kept when their residual
/// exceeds `0.5 / sqrt(m)`; one always does while the span is incomplete.
fn complete_basis(ucols: &mut [Vec<f64>], missing: &[usize], m: usize) {
    let mut basis: Vec<Vec<f64>> = ucols
        .iter()
        .enumerate()
        .filter(|(i, _)| !missing.contains(i))
        .map(|(_, c)| c.clone())
        .collect();
    let keep = 0.5 / (m as f64).sqrt();
    let mut next = 0;
    for &slot in missing {
        let col = loop {
            assert!(next < m, "column count exceeds dimension");
            let mut r = vec![0.0; m];
            r[next] = 1.0;
            next += 1;
            for _ in 0..2 {
                for b in &basis {
                    let d = dot(&r, b);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri -= d * bi;
                    }
                }
            }
            let norm = dot(&r, &r).sqrt();
            if norm > keep {
                break r.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        basis.push(col.clone());
        ucols[slot] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal_cols(m: &Matrix, tol: f64) {
        let g = m.transpose().matmul(m).unwrap();
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g[(i, j)] - want).abs() < tol,
                    "gram[{i},{j}] = {}",
                    g[(i, j)]
                );
            }
        }
    }

    #[test]
    fn diagonal_singular_values() {
        let r = svd(&Matrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(r.sigma, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn unsorted_diagonal_is_sorted() {
        let r = svd(&Matrix::from_diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(r.sigma, vec![3.0, 2.0, 1.0]);
        assert!(
            (r.reconstruct()
                .sub(&Matrix::from_diag(&[1.0, 3.0, 2.0]))
                .unwrap())
            .frobenius_norm()
                < 1e-14
        );
    }

    #[test]
    fn identity_has_unit_sigma_and_signed_permutation_factors() {
        let r = svd(&Matrix::identity(4)).unwrap();
        assert_eq!(r.sigma, vec![1.0; 4]);
        for m in [&r.u, &r.v] {
            for j in 0..4 {
                let nonzero: Vec<f64> = m.col(j).into_iter().filter(|x| *x != 0.0).collect();
                assert_eq!(nonzero.len(), 1);
                assert_eq!(nonzero[0].abs(), 1.0);
            }
        }
    }

    #[test]
    fn rank_deficient_input_gets_full_orthonormal_u() {
        // rank 1, 4x3
        let a = Matrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
        let r = svd(&a).unwrap();
        assert_eq!(r.rank(), 1);
        assert_orthonormal_cols(&r.u, 1e-10);
        assert_orthonormal_cols(&r.v, 1e-10);
        let err = r.reconstruct().sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let r = svd(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(r.sigma, vec![0.0, 0.0]);
        assert_eq!(r.rank(), 0);
        assert_orthonormal_cols(&r.u, 1e-12);
    }

    #[test]
    fn wide_matrix_uses_transpose() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 4.0]]).unwrap();
        let r = svd(&a).unwrap();
        assert_eq!(r.u.shape(), (2, 2));
        assert_eq!(r.v.shape(), (3, 2));
        assert!(r.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn tail_norm_of_diag() {
        let r = svd(&Matrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert!((r.tail_norm(1) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.tail_norm(3), 0.0);
    }
}
