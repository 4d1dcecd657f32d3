use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::truncate_to_rank;
use crate::net::Network;

use super::{DampingSequence, GammaProfile, RegError};

/// DLR step: each layer independently draws `r ~ U(0,1)` and, when
/// `r <= gamma_l`, has every weight matrix (or kernel slice) replaced by its
/// rank-`k` factorization. Biases are untouched and matrices already of
/// rank `<= k` are left alone. Returns the indices of layers that changed.
///
/// One draw is consumed per layer regardless of outcome.
pub fn dlr_select_and_substitute<R: Rng + ?Sized>(
    net: &mut Network,
    profile: &GammaProfile,
    rng: &mut R,
    k: usize,
) -> Result<Vec<usize>, RegError> {
    check_profile(net, profile)?;
    let mut substituted = Vec::new();
    for l in 0..net.depth() {
        let r: f64 = rng.random();
        if r > profile.gamma[l] {
            continue;
        }
        let mut mats = net.layer(l).weight_matrices();
        let mut changed = false;
        for m in &mut mats {
            if let Some(low) = truncate_to_rank(m, k)? {
                *m = low;
                changed = true;
            }
        }
        if changed {
            net.set_weight_matrices(l, &mats)?;
            substituted.push(l);
        }
    }
    Ok(substituted)
}

/// Layers taking part in the Tikhonov term this epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlrSelection {
    pub selected: Vec<usize>,
    /// `1 / |selected|`, or 0 when nothing is selected.
    pub gamma_reg: f64,
}

impl AlrSelection {
    pub fn new(selected: Vec<usize>) -> Self {
        let gamma_reg = if selected.is_empty() {
            0.0
        } else {
            1.0 / selected.len() as f64
        };
        Self {
            selected,
            gamma_reg,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// ALR selection: layer `l` joins iff `DS(t) * r_l <= gamma_l` with
/// independent `r_l ~ U(0,1)`.
pub fn alr_select<R: Rng + ?Sized>(
    profile: &GammaProfile,
    ds: DampingSequence,
    t: u32,
    rng: &mut R,
) -> AlrSelection {
    let damp = ds.at(t as f64);
    let selected = profile
        .gamma
        .iter()
        .enumerate()
        .filter_map(|(l, &g)| {
            let r: f64 = rng.random();
            (damp * r <= g).then_some(l)
        })
        .collect();
    AlrSelection::new(selected)
}

pub(crate) fn check_profile(net: &Network, profile: &GammaProfile) -> Result<(), RegError> {
    if profile.len() != net.depth() {
        return Err(RegError::ProfileLength {
            profile: profile.len(),
            layers: net.depth(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rank, Matrix};
    use crate::net::{Activation, Layer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_layer_net() -> Network {
        let w0 = Matrix::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.2, -1.0, 0.3]]).unwrap();
        let w1 = Matrix::from_rows(&[vec![0.7, -0.4], vec![0.1, 0.9]]).unwrap();
        Network::new(vec![
            Layer::dense(w0, vec![0.1, -0.1], Activation::Tanh).unwrap(),
            Layer::dense(w1, vec![0.0, 0.2], Activation::Linear).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn gamma_one_always_substituted_gamma_zero_never() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut net = two_layer_net();
            let profile = GammaProfile::from_gamma(vec![1.0, 0.0]);
            let subs = dlr_select_and_substitute(&mut net, &profile, &mut rng, 1).unwrap();
            assert_eq!(subs, vec![0]);
            assert_eq!(rank(net.dense_weights(0).unwrap()).unwrap(), 1);
            assert_eq!(net.dense_weights(1), two_layer_net().dense_weights(1));
            assert_eq!(net.layer(0).bias(), &[0.1, -0.1]);
        }
    }

    #[test]
    fn rank_one_layers_skipped() {
        let mut net = two_layer_net();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let all = GammaProfile::from_gamma(vec![1.0, 1.0]);
        dlr_select_and_substitute(&mut net, &all, &mut rng, 1).unwrap();
        let again = dlr_select_and_substitute(&mut net, &all, &mut rng, 1).unwrap();
        assert!(again.is_empty());
    }

    #[test]
    fn seeded_selection_replays() {
        let profile = GammaProfile::from_gamma(vec![0.4, 0.6]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..30)
                .map(|_| {
                    let mut net = two_layer_net();
                    dlr_select_and_substitute(&mut net, &profile, &mut rng, 1).unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
    }

    #[test]
    fn alr_gamma_over_damping_one_always_selected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 8; // ln 8 > 2, DS < 0.5
        let profile = GammaProfile::from_gamma(vec![0.5, 1.0]);
        for _ in 0..200 {
            let sel = alr_select(&profile, DampingSequence::InvLog, t, &mut rng);
            assert_eq!(sel.selected, vec![0, 1]);
            assert_eq!(sel.gamma_reg, 0.5);
        }
    }

    #[test]
    fn huge_damping_selects_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let profile = GammaProfile::from_gamma(vec![1.0, 0.3]);
        for t in 1..100 {
            let sel = alr_select(&profile, DampingSequence::Constant(1e300), t, &mut rng);
            assert!(sel.is_empty());
            assert_eq!(sel.gamma_reg, 0.0);
        }
    }

    #[test]
    fn profile_length_checked() {
        let mut net = two_layer_net();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bad = GammaProfile::from_gamma(vec![1.0]);
        assert!(matches!(
            dlr_select_and_substitute(&mut net, &bad, &mut rng, 1),
            Err(RegError::ProfileLength { .. })
        ));
    }
}
