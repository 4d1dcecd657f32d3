//! Small dense solvers kept separate from the Jacobi SVD so the oracles
//! check it along an independent route.

use rand::Rng;

use crate::linalg::Matrix;

/// Solves `g x = b` for symmetric positive definite `g` by Cholesky.
/// Returns `None` when a pivot is not safely positive.
pub fn cholesky_solve(g: &Matrix, b: &Matrix) -> Option<Matrix> {
    let n = g.rows();
    debug_assert_eq!(g.cols(), n);
    debug_assert_eq!(b.rows(), n);
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(0.0, f64::max);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 1e-13 * scale) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let m = b.cols();
    let mut x = b.clone();
    for c in 0..m {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Some(x)
}

/// Largest singular value by power iteration on `a^T a`.
pub fn top_singular_value<R: Rng + ?Sized>(a: &Matrix, rng: &mut R) -> f64 {
    let n = a.cols();
    let at = a.transpose();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let av = a.matvec(&v).expect("shape");
        let w = at.matvec(&av).expect("shape");
        let next: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        v = w;
        if (next - lambda).abs() <= 1e-16 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}
