use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    Sigmoid,
    /// Only valid on the output layer.
    Softmax,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Linear,
        Activation::Relu,
        Activation::Tanh,
        Activation::Sigmoid,
        Activation::Softmax,
    ];

    pub fn apply(self, z: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear => z.to_vec(),
            Activation::Relu => z.iter().map(|&x| x.max(0.0)).collect(),
            Activation::Tanh => z.iter().map(|x| x.tanh()).collect(),
            Activation::Sigmoid => z.iter().map(|&x| sigmoid(x)).collect(),
            Activation::Softmax => {
                let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|&x| (x - max).exp()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            }
        }
    }

    /// Vector-Jacobian product: maps `dL/dy` to `dL/dz` given the
    /// pre-activation `z` and output `y`.
    pub fn backprop(self, z: &[f64], y: &[f64], grad_y: &[f64]) -> Vec<f64> {
        match self {
            Activation::Softmax => {
                let dot: f64 = grad_y.iter().zip(y).map(|(g, p)| g * p).sum();
                y.iter().zip(grad_y).map(|(p, g)| p * (g - dot)).collect()
            }
            _ => (0..z.len())
                .map(|i| grad_y[i] * self.derivative(z[i], y[i]))
                .collect(),
        }
    }

    /// Elementwise derivative `act'(z)`; not meaningful for softmax.
    #[inline]
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Softmax => unreachable!("softmax has a full Jacobian"),
        }
    }

    /// `||dy/dz||_F^2` for one sample.
    pub fn jacobian_sq_norm(self, z: &[f64], y: &[f64]) -> f64 {
        match self {
            Activation::Softmax => {
                // J = diag(p) - p p^T
                let mut s = 0.0;
                for i in 0..y.len() {
                    for j in 0..y.len() {
                        let d = if i == j { y[i] } else { 0.0 } - y[i] * y[j];
                        s += d * d;
                    }
                }
                s
            }
            _ => z
                .iter()
                .zip(y)
                .map(|(&zi, &yi)| self.derivative(zi, yi).powi(2))
                .sum(),
        }
    }

    /// Squared derivative per unit; softmax is handled by the caller.
    pub(crate) fn derivative_sq(self, z: f64, y: f64) -> f64 {
        self.derivative(z, y).powi(2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown activation '{s}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one_and_is_shift_invariant() {
        let a = Activation::Softmax.apply(&[1.0, 2.0, 3.0]);
        let b = Activation::Softmax.apply(&[1001.0, 1002.0, 1003.0]);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn parse_round_trip() {
        for a in Activation::ALL {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
        }
        assert!("gelu".parse::<Activation>().is_err());
    }
}
