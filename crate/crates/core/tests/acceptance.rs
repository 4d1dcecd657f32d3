//! Acceptance run: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the lines always reach stdout.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    alr_selection_tallies, fd_gradient, heads, instance, random_matrix, rel_err, rng, HIDDEN,
};
use lowrank_lab::exp::{compare, parse_layers, run, DatasetKind, ExperimentConfig};
use lowrank_lab::linalg::{lrf, lrf_reconstruct, svd};
use lowrank_lab::oracle::{
    als_lrf_oracle, lazy_weight_sweep, lemma1_sweep, theorem1_empirical, theorem1_exact,
    theorem3_gradient_identity, LazyWeightConfig, Theorem1Config,
};
use lowrank_lab::regula::{DampingSequence, Regularizer};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn theorem1_exact_recovery() -> Outcome {
    let r = theorem1_exact(&Theorem1Config::default()).expect("oracle runs");
    let worst = r.max_of("recovery_error").unwrap_or(f64::NAN);
    let evaluated = r.values_of("recovery_error").len();
    outcome(
        r.passed() && evaluated == 19,
        format!("{evaluated} ranks, max relative recovery error {worst:.2e} (< 1e-10)"),
    )
}

fn theorem1_empirical_retrain() -> Outcome {
    let r = theorem1_empirical(&Theorem1Config::default()).expect("oracle runs");
    let gaps = r.values_of("post_loss_rel_gap");
    let pre = r.values_of("pre_minus_trained_loss");
    let worst_gap = gaps.iter().copied().fold(0.0, f64::max);
    let min_pre = pre.iter().copied().fold(f64::INFINITY, f64::min);
    let ok = gaps.len() == 19
        && gaps.iter().all(|&g| g <= 0.05)
        && pre.len() == 19
        && pre.iter().all(|&p| p > 0.0);
    outcome(
        ok,
        format!(
            "k=1..19: max post-retrain loss gap {:.3}% (<= 5%), min pre-retrain excess {min_pre:.3e} (> 0); max weight recovery {:.3e}",
            100.0 * worst_gap,
            r.max_of("recovery_error").unwrap_or(f64::NAN)
        ),
    )
}

fn eckart_young() -> Outcome {
    let mut r = rng(2024);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_tail = 0.0f64;
    for i in 0..50 {
        let a = random_matrix(&mut r, 8, 6);
        let dec = svd(&a).expect("finite");
        for k in 1..=3 {
            let e = a
                .sub(&lrf_reconstruct(&lrf(&a, k).expect("rank 6")))
                .unwrap()
                .frobenius_norm();
            let als = als_lrf_oracle(&a, k, 5, 500, i).expect("ALS converges");
            let e_als = a.sub(&lrf_reconstruct(&als)).unwrap().frobenius_norm();
            worst_excess = worst_excess.max(e - e_als);
            worst_tail = worst_tail.max((e - dec.tail_norm(k)).abs());
        }
    }
    outcome(
        worst_excess <= 1e-8 && worst_tail <= 1e-8,
        format!(
            "150 cases: max (svd - als) residual {worst_excess:.2e} (<= 1e-8), max |residual - tail| {worst_tail:.2e} (<= 1e-8)"
        ),
    )
}

fn gradient_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut combos = 0;
    let mut failures = 0;
    for conv_first in [false, true] {
        for hidden in HIDDEN {
            for (kind, head) in heads() {
                combos += 1;
                for seed in 0..20 {
                    let (net, batch) = instance(conv_first, hidden, head, kind, seed);
                    let (_, g) = net.loss_and_gradient(&batch, kind).expect("valid instance");
                    let e = rel_err(&g.flatten(), &fd_gradient(&net, &batch, kind, 1e-6));
                    worst = worst.max(e);
                    if e >= 1e-5 {
                        failures += 1;
                    }
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!("{combos} combinations x 20 instances, max relative error {worst:.2e} (< 1e-5), {failures} failures"),
    )
}

fn lemma1() -> Outcome {
    let r = lemma1_sweep(100, 0).expect("oracle runs");
    let ranks = r.values_of("rank");
    let ok = ranks.iter().filter(|&&k| k >= 2.0).count();
    outcome(
        r.passed() && ok == 100,
        format!("{ok}/100 zero-loss classifiers with numerical rank >= 2"),
    )
}

fn theorem3() -> Outcome {
    let ident = theorem3_gradient_identity(20, 0).expect("oracle runs");
    let seeds: Vec<u64> = (0..5).collect();
    let lazy = lazy_weight_sweep(&LazyWeightConfig::default(), &seeds, 4).expect("oracle runs");
    let drops = lazy
        .values_of("seeds_with_drop")
        .first()
        .copied()
        .unwrap_or(0.0);
    outcome(
        ident.passed() && lazy.passed(),
        format!(
            "identity max abs error {:.2e} (<= 1e-8) over 20 instances; train-accuracy drop in {drops}/5 seeds (>= 4)",
            ident.max_of("abs_error").unwrap_or(f64::NAN)
        ),
    )
}

fn selection_law() -> Outcome {
    let mut misses = Vec::new();
    let mut checks = 0;
    for (i, ds) in DampingSequence::KINDS.into_iter().enumerate() {
        for t in alr_selection_tallies(ds, &[0.1, 0.5, 1.0], 10_000, 100 + i as u64) {
            checks += 1;
            if !t.inside() {
                misses.push(format!(
                    "{ds} gamma {}: {} not in {:?}",
                    t.gamma, t.count, t.interval
                ));
            }
        }
    }
    outcome(
        misses.is_empty(),
        if misses.is_empty() {
            format!("{checks} (damping, gamma) pairs over 10^4 epochs inside exact 99% intervals")
        } else {
            format!(
                "{} of {checks} outside 99% interval: {}",
                misses.len(),
                misses.join("; ")
            )
        },
    )
}

fn overfit_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetKind::NoisyIrisLike,
        noise: 0.3,
        layers: parse_layers("dense:64:tanh,dense:64:tanh,dense:3:softmax").unwrap(),
        step_size: 0.2,
        max_epochs: 1000,
        ..ExperimentConfig::with_seed(seed)
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn overfitting_reduction() -> Outcome {
    let configs: Vec<ExperimentConfig> = [
        Regularizer::None,
        Regularizer::Dlr,
        Regularizer::Alr {
            damping: DampingSequence::InvLog,
        },
    ]
    .into_iter()
    .map(|regularizer| ExperimentConfig {
        regularizer,
        ..overfit_config(0)
    })
    .collect();
    let table = compare(&configs, &[0, 1, 2, 3, 4]).expect("runs finish");
    let med: Vec<f64> = table
        .rows
        .iter()
        .map(|r| median(&r.per_seed.iter().map(|s| s.1).collect::<Vec<_>>()))
        .collect();
    let gap: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.train_acc.as_ref().unwrap().mean - r.test_acc.as_ref().unwrap().mean)
        .collect();
    outcome(
        med[1] < med[0] && med[2] < med[0] && gap[2] < gap[0],
        format!(
            "median test loss none {:.4}, dlr {:.4}, alr {:.4}; mean accuracy gap none {:.4}, alr {:.4}",
            med[0], med[1], med[2], gap[0], gap[2]
        ),
    )
}

fn degenerate_equivalence() -> Outcome {
    let base = ExperimentConfig {
        max_epochs: 60,
        patience: 100,
        ..overfit_config(3)
    };
    let plain = run(&base, None).expect("runs").metrics_csv();
    let dlr = run(
        &ExperimentConfig {
            regularizer: Regularizer::Dlr,
            ..base.clone()
        },
        None,
    )
    .expect("runs")
    .metrics_csv();
    let alr = run(
        &ExperimentConfig {
            regularizer: Regularizer::Alr {
                damping: DampingSequence::Constant(1e300),
            },
            ..base.clone()
        },
        None,
    )
    .expect("runs")
    .metrics_csv();
    outcome(
        dlr == plain && alr == plain,
        format!(
            "DLR without trigger identical: {}, ALR with empty selection identical: {}",
            dlr == plain,
            alr == plain
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        max_epochs: 100,
        batch_size: 16,
        regularizer: Regularizer::Alr {
            damping: DampingSequence::InvT,
        },
        ..overfit_config(7)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&cfg, Some(a.path())).expect("runs");
    run(&cfg, Some(b.path())).expect("runs");
    let x = std::fs::read(a.path().join("metrics.csv")).unwrap();
    let y = std::fs::read(b.path().join("metrics.csv")).unwrap();
    outcome(x == y, format!("{} bytes, identical: {}", x.len(), x == y))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<Duration>); 10] = [
        (
            "exact linear recovery after one step",
            theorem1_exact_recovery,
            Some(Duration::from_secs(5)),
        ),
        (
            "empirical retrain after rank-k substitution",
            theorem1_empirical_retrain,
            Some(Duration::from_secs(60)),
        ),
        (
            "truncated SVD optimality",
            eckart_young,
            Some(Duration::from_secs(30)),
        ),
        (
            "finite-difference gradients",
            gradient_check,
            Some(Duration::from_secs(60)),
        ),
        ("zero-loss classifiers have rank >= 2", lemma1, None),
        ("penalty gradient identity and lazy layer", theorem3, None),
        ("selection-probability law", selection_law, None),
        (
            "overfitting reduction",
            overfitting_reduction,
            Some(Duration::from_secs(300)),
        ),
        ("degenerate equivalences", degenerate_equivalence, None),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let passed = o.passed && in_time;
        if !passed {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!(
            "AC{:<2} {} {name}: {} [{:.2}s{budget}]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
