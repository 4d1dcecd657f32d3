use serde::{Deserialize, Serialize};

use crate::linalg::layer_condition_number;
use crate::net::{NetError, Network};

/// Per-layer condition numbers and their max-normalized values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaProfile {
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl GammaProfile {
    /// `gamma_l = kappa_l / max_i kappa_i`. A profile whose largest kappa
    /// is zero (or not a number) gets uniform `gamma = 1`. Infinite kappas
    /// share `gamma = 1` and every finite one maps to 0.
    pub fn from_kappa(kappa: Vec<f64>) -> Self {
        let max = kappa.iter().copied().fold(0.0f64, f64::max);
        let gamma = if !(max > 0.0) {
            vec![1.0; kappa.len()]
        } else if max.is_infinite() {
            kappa
                .iter()
                .map(|&k| if k.is_infinite() { 1.0 } else { 0.0 })
                .collect()
        } else {
            kappa.iter().map(|&k| k / max).collect()
        };
        Self { kappa, gamma }
    }

    /// Builds a profile directly from `gamma` values (for tests and forced
    /// selections); `kappa` is set equal to `gamma`.
    pub fn from_gamma(gamma: Vec<f64>) -> Self {
        Self {
            kappa: gamma.clone(),
            gamma,
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Condition number of every layer on a probe batch, normalized.
pub fn gamma_profile(net: &Network, probe_inputs: &[Vec<f64>]) -> Result<GammaProfile, NetError> {
    let cache = net.forward(probe_inputs)?;
    let kappa = (0..net.depth())
        .map(|l| layer_condition_number(net.layer(l), cache.layer_inputs(l)))
        .collect();
    Ok(GammaProfile::from_kappa(kappa))
}

/// Sum of normalized condition numbers; lies in `[1, L]`.
pub fn sncn(profile: &GammaProfile) -> f64 {
    profile.gamma.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_layer_normalization() {
        let p = GammaProfile::from_kappa(vec![10.0, 5.0]);
        assert_eq!(p.gamma, vec![1.0, 0.5]);
        assert_eq!(sncn(&p), 1.5);
    }

    #[test]
    fn single_layer_is_one() {
        let p = GammaProfile::from_kappa(vec![123.4]);
        assert_eq!(p.gamma, vec![1.0]);
        assert_eq!(sncn(&p), 1.0);
    }

    #[test]
    fn all_zero_is_uniform() {
        assert_eq!(
            GammaProfile::from_kappa(vec![0.0, 0.0]).gamma,
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn infinite_kappa_dominates() {
        let p = GammaProfile::from_kappa(vec![3.0, f64::INFINITY]);
        assert_eq!(p.gamma, vec![0.0, 1.0]);
    }

    #[test]
    fn scale_invariant() {
        let k = vec![0.3, 7.1, 2.2, 7.0];
        let a = GammaProfile::from_kappa(k.clone());
        let b = GammaProfile::from_kappa(k.iter().map(|x| x * 1024.0).collect());
        assert_eq!(a.gamma, b.gamma);
    }
}
