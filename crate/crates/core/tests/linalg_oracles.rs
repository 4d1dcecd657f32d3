mod common;

use rand::Rng;

use common::{gauss_jordan_inverse, random_matrix, rng};
use lowrank_lab::linalg::{
    layer_condition_number, lrf, lrf_reconstruct, matrix_condition_number, svd, Matrix,
};
use lowrank_lab::net::{Activation, InputShape, LayerSpec, Network};
use lowrank_lab::oracle::{als_lrf_oracle, top_singular_value};

#[test]
fn truncated_svd_is_no_worse_than_als() {
    let mut r = rng(11);
    for i in 0..50 {
        let a = random_matrix(&mut r, 8, 6);
        let dec = svd(&a).unwrap();
        for k in 1..=3 {
            let ours = a.sub(&lrf_reconstruct(&lrf(&a, k).unwrap())).unwrap();
            let als = als_lrf_oracle(&a, k, 5, 500, i).unwrap();
            let theirs = a.sub(&lrf_reconstruct(&als)).unwrap();
            let (e, e_als) = (ours.frobenius_norm(), theirs.frobenius_norm());
            assert!(e <= e_als + 1e-8, "#{i} k={k}: svd {e} als {e_als}");
            assert!((e - dec.tail_norm(k)).abs() <= 1e-8);
        }
    }
}

#[test]
fn svd_sigma_max_matches_power_iteration() {
    let mut r = rng(3);
    for (m, n) in [(5, 5), (7, 3), (2, 9), (12, 10)] {
        let a = random_matrix(&mut r, m, n);
        let s = svd(&a).unwrap().sigma[0];
        let p = top_singular_value(&a, &mut r);
        assert!((s - p).abs() <= 1e-9 * s, "{m}x{n}: {s} vs {p}");
    }
}

#[test]
fn condition_number_matches_explicit_inverse() {
    let mut r = rng(5);
    for n in [2, 3, 5, 8] {
        for _ in 0..5 {
            let a = random_matrix(&mut r, n, n);
            let inv = gauss_jordan_inverse(&a).expect("random matrix is invertible");
            let reference = top_singular_value(&a, &mut r) * top_singular_value(&inv, &mut r);
            let k = matrix_condition_number(&a);
            assert!(
                (k - reference).abs() <= 1e-6 * reference,
                "n={n}: {k} vs {reference}"
            );
        }
    }
    let singular = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
    assert!(matrix_condition_number(&singular).is_infinite());
}

/// `||J||_F ||theta||_F / ||f||_F` with `J` assembled column by column from
/// central differences over the weight entries in `cols`.
fn fd_condition(net: &Network, inputs: &[Vec<f64>], cols: &[usize]) -> f64 {
    let theta = net.flat_params();
    let outputs = |p: &[f64]| -> Vec<f64> {
        let mut n = net.clone();
        n.set_flat_params(p).unwrap();
        n.predict(inputs).unwrap().concat()
    };
    let f = outputs(&theta);
    let h = 1e-6;
    let mut jac_sq = 0.0;
    let mut p = theta.clone();
    for &i in cols {
        p[i] = theta[i] + h;
        let up = outputs(&p);
        p[i] = theta[i] - h;
        let down = outputs(&p);
        p[i] = theta[i];
        jac_sq += up
            .iter()
            .zip(&down)
            .map(|(u, d)| ((u - d) / (2.0 * h)).powi(2))
            .sum::<f64>();
    }
    let theta_norm = cols
        .iter()
        .map(|&i| theta[i] * theta[i])
        .sum::<f64>()
        .sqrt();
    let f_norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    jac_sq.sqrt() * theta_norm / f_norm
}

#[test]
fn dense_layer_condition_matches_fd_jacobian() {
    let mut r = rng(8);
    for act in Activation::ALL {
        let spec = [LayerSpec::Dense {
            units: 4,
            activation: act,
        }];
        let mut net = Network::init(InputShape::flat(3), &spec, &mut r).unwrap();
        let theta: Vec<f64> = (0..net.param_count())
            .map(|_| r.random_range(-1.0..1.0))
            .collect();
        net.set_flat_params(&theta).unwrap();
        let inputs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let nw = net.layer(0).weights().len();
        let cols: Vec<usize> = (0..nw).collect();
        let k = layer_condition_number(net.layer(0), &inputs);
        let reference = fd_condition(&net, &inputs, &cols);
        assert!(
            (k - reference).abs() <= 1e-6 * reference,
            "{act:?}: {k} vs {reference}"
        );
    }
}

#[test]
fn conv_layer_condition_is_worst_slice_of_fd_jacobian() {
    let mut r = rng(9);
    let (cin, fh, fw, nf) = (2, 2, 2, 3);
    for act in [Activation::Linear, Activation::Tanh, Activation::Sigmoid] {
        let shape = InputShape {
            channels: cin,
            height: 4,
            width: 4,
        };
        let spec = [LayerSpec::Conv {
            filter_height: fh,
            filter_width: fw,
            filters: nf,
            activation: act,
        }];
        let mut net = Network::init(shape, &spec, &mut r).unwrap();
        let theta: Vec<f64> = (0..net.param_count())
            .map(|_| r.random_range(-1.0..1.0))
            .collect();
        net.set_flat_params(&theta).unwrap();
        let inputs: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..shape.len())
                    .map(|_| r.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        // Kernel layout is [h][w][c][f].
        let reference = (0..cin)
            .map(|c| {
                let cols: Vec<usize> = (0..fh * fw)
                    .flat_map(|s| (0..nf).map(move |f| (s * cin + c) * nf + f))
                    .collect();
                fd_condition(&net, &inputs, &cols)
            })
            .fold(0.0, f64::max);
        let k = layer_condition_number(net.layer(0), &inputs);
        assert!(
            (k - reference).abs() <= 1e-6 * reference,
            "{act:?}: {k} vs {reference}"
        );
    }
}
