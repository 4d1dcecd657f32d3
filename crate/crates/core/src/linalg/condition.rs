use crate::net::{Layer, LayerKind};

use super::svd::svd;
use super::Matrix;

/// Returned by [`layer_condition_number`] when the layer output vanishes.
pub const KAPPA_SENTINEL: f64 = f64::MAX;

/// `sigma_max / sigma_min`, or `+inf` once `sigma_min < 1e-14 sigma_max`
/// (including the zero matrix).
pub fn matrix_condition_number(a: &Matrix) -> f64 {
    let Ok(dec) = svd(a) else {
        return f64::INFINITY;
    };
    let smax = dec.sigma[0];
    let smin = *dec.sigma.last().expect("min(rows, cols) >= 1");
    if smax == 0.0 || smin < 1e-14 * smax {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Nonlinear condition number `||J||_F ||theta||_F / ||f||_F` of one layer
/// over a batch of its inputs, with `theta` the weights (bias excluded),
/// `f` the stacked layer outputs and `J = d vec(f) / d vec(theta)`.
///
/// Conv layers are evaluated per kernel slice (one per input channel) and
/// aggregated by max.
pub fn layer_condition_number(layer: &Layer, inputs: &[Vec<f64>]) -> f64 {
    let mut out_sq = 0.0;
    let mut per_sample: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(inputs.len());
    for x in inputs {
        let z = layer.preactivation(x);
        let y = layer.activation().apply(&z);
        out_sq += y.iter().map(|v| v * v).sum::<f64>();
        per_sample.push((z, y));
    }
    let out_norm = out_sq.sqrt();
    if !(out_norm >= 1e-12) {
        return KAPPA_SENTINEL;
    }

    match layer.kind() {
        LayerKind::Dense { weights } => {
            // d y_i / d W_jk = (dy/dz)_ij x_k, so ||J||^2 = ||x||^2 ||dy/dz||_F^2.
            let jac_sq: f64 = inputs
                .iter()
                .zip(&per_sample)
                .map(|(x, (z, y))| {
                    let xsq: f64 = x.iter().map(|v| v * v).sum();
                    xsq * layer.activation().jacobian_sq_norm(z, y)
                })
                .sum();
            jac_sq.sqrt() * weights.frobenius_norm() / out_norm
        }
        LayerKind::Conv2d {
            kernel,
            in_height,
            in_width,
        } => {
            let (fh, fw, cin, nf) = kernel.dims();
            let oh = in_height - fh + 1;
            let ow = in_width - fw + 1;
            let act = layer.activation();
            let mut worst: f64 = 0.0;
            for c in 0..cin {
                let mut jac_sq = 0.0;
                for (x, (z, y)) in inputs.iter().zip(&per_sample) {
                    // Patch energy of channel c at every output position.
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut patch = 0.0;
                            for h in 0..fh {
                                for w in 0..fw {
                                    let v = x[(c * in_height + oy + h) * in_width + ox + w];
                                    patch += v * v;
                                }
                            }
                            for f in 0..nf {
                                let i = (f * oh + oy) * ow + ox;
                                jac_sq += act.derivative_sq(z[i], y[i]) * patch;
                            }
                        }
                    }
                }
                let slice_norm = (0..fh * fw)
                    .flat_map(|s| (0..nf).map(move |f| (s, f)))
                    .map(|(s, f)| kernel.get(s / fw, s % fw, c, f).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(jac_sq.sqrt() * slice_norm / out_norm);
            }
            worst
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Activation;

    #[test]
    fn identity_and_diag() {
        assert_eq!(matrix_condition_number(&Matrix::identity(3)), 1.0);
        let k = matrix_condition_number(&Matrix::from_diag(&[10.0, 0.1]));
        assert!((k - 100.0).abs() < 1e-12);
    }

    #[test]
    fn singular_and_zero_give_infinity() {
        assert_eq!(matrix_condition_number(&Matrix::zeros(2, 2)), f64::INFINITY);
        assert_eq!(
            matrix_condition_number(&Matrix::from_diag(&[1.0, 0.0])),
            f64::INFINITY
        );
    }

    #[test]
    fn rectangular_ratio_of_extremes() {
        let a = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((matrix_condition_number(&a) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_identity_layer_single_sample() {
        // ||J||_F^2 = sum_i ||x||^2 = 2, ||theta||_F = sqrt(2), ||f|| = 1.
        let layer = Layer::dense(Matrix::identity(2), vec![0.0, 0.0], Activation::Linear).unwrap();
        let k = layer_condition_number(&layer, &[vec![1.0, 0.0]]);
        assert!((k - 2.0).abs() < 1e-15, "{k}");
    }

    #[test]
    fn scaling_weights_leaves_linear_kappa_unchanged() {
        let w = Matrix::from_rows(&[vec![0.3, -1.2, 0.5], vec![2.0, 0.1, -0.4]]).unwrap();
        let xs = vec![vec![1.0, 2.0, -1.0], vec![0.5, 0.0, 0.3]];
        let base = layer_condition_number(
            &Layer::dense(w.clone(), vec![0.0; 2], Activation::Linear).unwrap(),
            &xs,
        );
        for c in [0.01, 3.0, 250.0] {
            let k = layer_condition_number(
                &Layer::dense(w.scale(c), vec![0.0; 2], Activation::Linear).unwrap(),
                &xs,
            );
            assert!((k - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn vanishing_output_is_sentinel() {
        let layer = Layer::dense(Matrix::zeros(2, 2), vec![0.0; 2], Activation::Tanh).unwrap();
        assert_eq!(
            layer_condition_number(&layer, &[vec![1.0, 1.0]]),
            KAPPA_SENTINEL
        );
    }
}
