#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lowrank_lab::linalg::Matrix;
use lowrank_lab::net::{Activation, InputShape, LayerSpec, LossKind, Network, SampleBatch};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Central-difference gradient of the loss over the flat parameter vector.
pub fn fd_gradient(net: &Network, batch: &SampleBatch, kind: LossKind, h: f64) -> Vec<f64> {
    let theta = net.flat_params();
    let mut probe = net.clone();
    let mut eval = |p: &[f64]| {
        probe.set_flat_params(p).unwrap();
        let (l, _) = probe.loss_and_gradient(batch, kind).unwrap();
        l
    };
    let mut g = vec![0.0; theta.len()];
    let mut p = theta.clone();
    for i in 0..theta.len() {
        p[i] = theta[i] + h;
        let up = eval(&p);
        p[i] = theta[i] - h;
        let down = eval(&p);
        p[i] = theta[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

/// `||a - b|| / max(||a||, ||b||)`, 0 when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central interval holding at least `level` of the mass of a sum of
/// independent Bernoulli(p_i), computed exactly by convolution.
pub fn poisson_binomial_interval(ps: &[f64], level: f64) -> (usize, usize) {
    let mut fixed = 0;
    let mut pmf = vec![1.0];
    for &p in ps {
        if p >= 1.0 {
            fixed += 1;
            continue;
        }
        if p <= 0.0 {
            continue;
        }
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, &m) in pmf.iter().enumerate() {
            next[k] += m * (1.0 - p);
            next[k + 1] += m * p;
        }
        pmf = next;
    }
    let tail = (1.0 - level) / 2.0;
    let mut acc = 0.0;
    let mut lo = 0;
    for (k, &m) in pmf.iter().enumerate() {
        acc += m;
        if acc > tail {
            lo = k;
            break;
        }
    }
    acc = 0.0;
    let mut hi = pmf.len() - 1;
    for (k, &m) in pmf.iter().enumerate().rev() {
        acc += m;
        if acc > tail {
            hi = k;
            break;
        }
    }
    (lo + fixed, hi + fixed)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))?;
        if m[(p, c)].abs() < 1e-300 {
            return None;
        }
        for j in 0..n {
            let t = m[(c, j)];
            m[(c, j)] = m[(p, j)];
            m[(p, j)] = t;
            let t = inv[(c, j)];
            inv[(c, j)] = inv[(p, j)];
            inv[(p, j)] = t;
        }
        let d = m[(c, c)];
        for j in 0..n {
            m[(c, j)] /= d;
            inv[(c, j)] /= d;
        }
        for i in 0..n {
            if i == c {
                continue;
            }
            let f = m[(i, c)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] -= f * m[(c, j)];
                inv[(i, j)] -= f * inv[(c, j)];
            }
        }
    }
    Some(inv)
}

pub struct SelectionTally {
    pub gamma: f64,
    pub count: usize,
    pub interval: (usize, usize),
}

impl SelectionTally {
    pub fn inside(&self) -> bool {
        self.interval.0 <= self.count && self.count <= self.interval.1
    }
}

/// Runs the ALR selection for epochs `1..=epochs` on a profile with the
/// given gammas and tallies how often each layer was picked, next to the
/// exact 99% interval implied by `min(1, gamma / DS(t))`.
pub fn alr_selection_tallies(
    ds: lowrank_lab::regula::DampingSequence,
    gammas: &[f64],
    epochs: u32,
    seed: u64,
) -> Vec<SelectionTally> {
    use lowrank_lab::regula::{alr_select, GammaProfile};
    let profile = GammaProfile::from_gamma(gammas.to_vec());
    let mut r = rng(seed);
    let mut counts = vec![0usize; gammas.len()];
    for t in 1..=epochs {
        for l in alr_select(&profile, ds, t, &mut r).selected {
            counts[l] += 1;
        }
    }
    gammas
        .iter()
        .zip(counts)
        .map(|(&g, count)| {
            let ps: Vec<f64> = (1..=epochs)
                .map(|t| (g / ds.at(t as f64)).min(1.0))
                .collect();
            SelectionTally {
                gamma: g,
                count,
                interval: poisson_binomial_interval(&ps, 0.99),
            }
        })
        .collect()
}

pub const HIDDEN: [Activation; 4] = [
    Activation::Linear,
    Activation::Relu,
    Activation::Tanh,
    Activation::Sigmoid,
];

/// Output activations valid for each loss.
pub fn heads() -> Vec<(LossKind, Activation)> {
    let mut v: Vec<_> = Activation::ALL
        .iter()
        .map(|&a| (LossKind::Mse, a))
        .collect();
    v.push((LossKind::CrossEntropy, Activation::Softmax));
    v
}

pub fn instance(
    conv_first: bool,
    hidden: Activation,
    head: Activation,
    kind: LossKind,
    seed: u64,
) -> (Network, SampleBatch) {
    let mut r = rng(seed);
    let (shape, first) = if conv_first {
        (
            InputShape {
                channels: 2,
                height: 4,
                width: 5,
            },
            LayerSpec::Conv {
                filter_height: 2,
                filter_width: 3,
                filters: 3,
                activation: hidden,
            },
        )
    } else {
        (
            InputShape::flat(5),
            LayerSpec::Dense {
                units: 6,
                activation: hidden,
            },
        )
    };
    let outputs = 3;
    let specs = [
        first,
        LayerSpec::Dense {
            units: outputs,
            activation: head,
        },
    ];
    let mut net = Network::init(shape, &specs, &mut r).unwrap();
    let theta: Vec<f64> = (0..net.param_count())
        .map(|_| r.random_range(-0.8..0.8))
        .collect();
    net.set_flat_params(&theta).unwrap();
    let n = 4;
    let inputs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..shape.len())
                .map(|_| r.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let targets: Vec<Vec<f64>> = (0..n)
        .map(|_| match kind {
            LossKind::CrossEntropy => {
                let c = r.random_range(0..outputs);
                (0..outputs)
                    .map(|j| if j == c { 1.0 } else { 0.0 })
                    .collect()
            }
            LossKind::Mse => (0..outputs).map(|_| r.random_range(-1.0..1.0)).collect(),
        })
        .collect();
    (net, SampleBatch::new(inputs, targets).unwrap())
}
