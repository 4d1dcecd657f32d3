mod common;

use common::{fd_gradient, heads, instance, rel_err, HIDDEN};
use lowrank_lab::net::{Activation, LossKind};
use lowrank_lab::regula::LowRankTargets;

#[test]
fn backprop_matches_finite_differences_for_every_combination() {
    let mut worst = 0.0f64;
    let mut combos = 0;
    for conv_first in [false, true] {
        for hidden in HIDDEN {
            for (kind, head) in heads() {
                combos += 1;
                for seed in 0..20 {
                    let (net, batch) = instance(conv_first, hidden, head, kind, seed);
                    let (_, g) = net.loss_and_gradient(&batch, kind).unwrap();
                    let fd = fd_gradient(&net, &batch, kind, 1e-6);
                    let e = rel_err(&g.flatten(), &fd);
                    worst = worst.max(e);
                    assert!(
                        e < 1e-5,
                        "conv={conv_first} hidden={hidden:?} head={head:?} loss={kind:?} seed={seed}: rel err {e:e}"
                    );
                }
            }
        }
    }
    assert_eq!(combos, 48);
    println!("worst relative error {worst:e}");
}

#[test]
fn tikhonov_gradient_matches_finite_differences() {
    for seed in 0..10 {
        let (mut net, _) = instance(
            seed % 2 == 1,
            Activation::Tanh,
            Activation::Linear,
            LossKind::Mse,
            seed,
        );
        let targets = LowRankTargets::compute(&net, &[0, 1], 1).unwrap();
        let gamma = 0.37;
        let mut g = lowrank_lab::net::GradientSet::zeros_like(&net);
        targets.add_gradient(&net, &mut g, gamma);
        let analytic = g.flatten();

        let theta = net.flat_params();
        let h = 1e-6;
        let mut fd = vec![0.0; theta.len()];
        let mut p = theta.clone();
        for i in 0..theta.len() {
            p[i] = theta[i] + h;
            net.set_flat_params(&p).unwrap();
            let up = targets.penalty(&net, gamma);
            p[i] = theta[i] - h;
            net.set_flat_params(&p).unwrap();
            let down = targets.penalty(&net, gamma);
            p[i] = theta[i];
            fd[i] = (up - down) / (2.0 * h);
        }
        net.set_flat_params(&theta).unwrap();
        let e = rel_err(&analytic, &fd);
        assert!(e < 1e-6, "seed {seed}: rel err {e:e}");
    }
}
