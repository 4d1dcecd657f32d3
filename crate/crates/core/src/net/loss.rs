use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NetError;

/// Row sums of cross-entropy inputs must be within this of 1.
const PROB_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `(1/T) sum_i ||f(x_i) - y_i||^2`
    Mse,
    /// `-(1/T) sum_i sum_j y_ij ln p_ij`, outputs must be probabilities.
    CrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::CrossEntropy => "cross_entropy",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "cross_entropy" => Ok(LossKind::CrossEntropy),
            other => Err(format!("unknown loss '{other}'")),
        }
    }
}

fn check_aligned(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(), NetError> {
    if outputs.is_empty() || outputs.len() != targets.len() {
        return Err(NetError::TargetShape {
            expected: outputs.len(),
            got: targets.len(),
        });
    }
    for (o, t) in outputs.iter().zip(targets) {
        if o.len() != t.len() {
            return Err(NetError::TargetShape {
                expected: o.len(),
                got: t.len(),
            });
        }
    }
    Ok(())
}

fn check_probabilities(outputs: &[Vec<f64>]) -> Result<(), NetError> {
    for (sample, p) in outputs.iter().enumerate() {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > PROB_TOL {
            return Err(NetError::NotProbabilities { sample });
        }
    }
    Ok(())
}

pub fn loss(outputs: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind) -> Result<f64, NetError> {
    check_aligned(outputs, targets)?;
    let t = outputs.len() as f64;
    let total: f64 = match kind {
        LossKind::Mse => outputs
            .iter()
            .zip(targets)
            .map(|(o, y)| o.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum(),
        LossKind::CrossEntropy => {
            check_probabilities(outputs)?;
            outputs
                .iter()
                .zip(targets)
                .map(|(p, y)| {
                    p.iter()
                        .zip(y)
                        .filter(|(_, &yj)| yj != 0.0)
                        .map(|(&pj, &yj)| -yj * pj.max(f64::MIN_POSITIVE).ln())
                        .sum::<f64>()
                })
                .sum()
        }
    };
    Ok(total / t)
}

/// `dL/df` for each sample.
pub(crate) fn loss_output_gradient(
    outputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    kind: LossKind,
) -> Result<Vec<Vec<f64>>, NetError> {
    check_aligned(outputs, targets)?;
    let t = outputs.len() as f64;
    Ok(match kind {
        LossKind::Mse => outputs
            .iter()
            .zip(targets)
            .map(|(o, y)| o.iter().zip(y).map(|(a, b)| 2.0 * (a - b) / t).collect())
            .collect(),
        LossKind::CrossEntropy => {
            check_probabilities(outputs)?;
            outputs
                .iter()
                .zip(targets)
                .map(|(p, y)| {
                    p.iter()
                        .zip(y)
                        .map(|(&pj, &yj)| -yj / pj.max(f64::MIN_POSITIVE) / t)
                        .collect()
                })
                .collect()
        }
    })
}

/// Fraction of samples whose argmax output matches the argmax target.
/// `None` for single-output (regression) problems.
pub fn accuracy(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Option<f64> {
    if outputs.is_empty() || outputs[0].len() < 2 {
        return None;
    }
    let hits = outputs
        .iter()
        .zip(targets)
        .filter(|(o, y)| argmax(o) == argmax(y))
        .count();
    Some(hits as f64 / outputs.len() as f64)
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
