use serde::{Deserialize, Serialize};

use crate::linalg::{svd, Matrix, RANK_TOL};
use crate::seed::{rng_for, Stream};

use super::dense::{cholesky_solve, gaussian};
use super::{Check, OracleError, SweepPoint, TheoremReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrototypeLayout {
    /// Independent Gaussian class centres.
    Random,
    /// Class centres that differ from a shared centre by a small offset.
    NearCollinear,
    /// Centres along the coordinate axes (requires `classes <= dims`).
    Orthogonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Config {
    pub classes: usize,
    pub dims: usize,
    pub samples_per_class: usize,
    pub layout: PrototypeLayout,
    pub seed: u64,
}

impl Lemma1Config {
    pub fn new(classes: usize, dims: usize, seed: u64) -> Self {
        Self {
            classes,
            dims,
            samples_per_class: 3,
            layout: PrototypeLayout::Random,
            seed,
        }
    }
}

/// Fits a bias-free linear classifier to one-hot targets and checks that
/// its numerical rank is at least two.
///
/// With no more samples than input dimensions the data can be interpolated,
/// and the fit used here is the minimum-norm interpolant
/// `W = Y^T (X X^T)^{-1} X`, which is where gradient descent on the squared
/// loss from zero initialization converges. A residual above `1e-10` means
/// the lemma's hypothesis (zero training loss) is unmet and the report is
/// inconclusive.
pub fn lemma1_check(cfg: &Lemma1Config) -> Result<TheoremReport, OracleError> {
    let m = cfg.classes;
    let d = cfg.dims;
    let n = m * cfg.samples_per_class;
    if m < 2 || cfg.samples_per_class == 0 || n > d {
        return Err(OracleError::Config(format!(
            "need classes >= 2 and classes * samples_per_class <= dims, got {m} x {} vs {d}",
            cfg.samples_per_class
        )));
    }
    if cfg.layout == PrototypeLayout::Orthogonal && m > d {
        return Err(OracleError::Config(
            "orthogonal prototypes need classes <= dims".into(),
        ));
    }
    let mut rng = rng_for(cfg.seed, Stream::Oracle);
    let base: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
    let prototypes: Vec<Vec<f64>> = (0..m)
        .map(|c| match cfg.layout {
            PrototypeLayout::Random => (0..d).map(|_| gaussian(&mut rng)).collect(),
            PrototypeLayout::NearCollinear => {
                base.iter().map(|b| b + 1e-3 * gaussian(&mut rng)).collect()
            }
            PrototypeLayout::Orthogonal => (0..d).map(|j| if j == c { 1.0 } else { 0.0 }).collect(),
        })
        .collect();
    let spread = match cfg.layout {
        PrototypeLayout::NearCollinear => 1e-4,
        _ => 0.1,
    };
    let mut x = Matrix::zeros(n, d);
    let mut y = Matrix::zeros(n, m);
    for c in 0..m {
        for s in 0..cfg.samples_per_class {
            let i = c * cfg.samples_per_class + s;
            for j in 0..d {
                x.data_mut()[i * d + j] = prototypes[c][j] + spread * gaussian(&mut rng);
            }
            y.data_mut()[i * m + c] = 1.0;
        }
    }

    let mut report = TheoremReport::new("zero-loss linear classifier has rank at least two")
        .param("classes", m)
        .param("dims", d)
        .param("samples", n)
        .param("layout", format!("{:?}", cfg.layout));
    let gram = x.matmul(&x.transpose())?;
    let Some(alpha) = cholesky_solve(&gram, &y) else {
        report.log("sample Gram matrix singular; data cannot be interpolated");
        return Ok(report.conclude());
    };
    // W (m x d) = alpha^T X
    let w = alpha.transpose().matmul(&x)?;
    let fit = x.matmul(&w.transpose())?;
    let residual = fit.sub(&y)?.frobenius_norm().powi(2) / n as f64;
    if residual > 1e-10 {
        report.log(format!("training loss {residual:.3e} not near zero"));
        return Ok(report.conclude());
    }
    let dec = svd(&w)?;
    let s1 = dec.sigma[0];
    let s2 = dec.sigma.get(1).copied().unwrap_or(0.0);
    report.log(format!("training loss {residual:.3e}, sigma_1 {s1:.6e}"));
    report.points.push(
        SweepPoint::new("classifier")
            .measure("rank", dec.rank() as f64, Check::AtLeast { limit: 2.0 })
            .measure(
                "sigma_2_over_sigma_1",
                s2 / s1,
                Check::Above { limit: RANK_TOL },
            ),
    );
    Ok(report.conclude())
}

/// `count` seeded datasets cycling through 2..=5 classes in 16 dimensions,
/// one sweep point per dataset.
pub fn lemma1_sweep(count: usize, seed: u64) -> Result<TheoremReport, OracleError> {
    let mut report = TheoremReport::new("zero-loss linear classifiers have rank at least two")
        .param("datasets", count)
        .param("classes", "2..=5")
        .param("dims", 16);
    for i in 0..count {
        let classes = 2 + i % 4;
        let cfg = Lemma1Config::new(classes, 16, seed.wrapping_add(i as u64));
        let r = lemma1_check(&cfg)?;
        match r.points.into_iter().next() {
            Some(mut p) => {
                p.label = format!("#{i} classes={classes}");
                report.points.push(p);
            }
            None => report.points.push(SweepPoint::skipped(
                format!("#{i} classes={classes}"),
                r.log.join("; "),
            )),
        }
    }
    let skipped = report
        .points
        .iter()
        .filter(|p| p.measurements.is_empty())
        .count();
    if skipped > 0 {
        report.log(format!(
            "{skipped} datasets could not be fitted to zero loss"
        ));
        report.points.push(SweepPoint::new("fitted").measure(
            "unfitted_datasets",
            skipped as f64,
            Check::AtMost { limit: 0.0 },
        ));
    }
    Ok(report.conclude())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Verdict;

    #[test]
    fn orthogonal_two_class_rank_is_two() {
        let cfg = Lemma1Config {
            layout: PrototypeLayout::Orthogonal,
            ..Lemma1Config::new(2, 8, 1)
        };
        let r = lemma1_check(&cfg).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.values_of("rank"), vec![2.0]);
    }

    #[test]
    fn multi_class_and_near_collinear() {
        for m in [3, 5] {
            let r = lemma1_check(&Lemma1Config::new(m, 16, 7)).unwrap();
            assert!(r.passed(), "{r}");
        }
        let cfg = Lemma1Config {
            layout: PrototypeLayout::NearCollinear,
            ..Lemma1Config::new(4, 16, 2)
        };
        let r = lemma1_check(&cfg).unwrap();
        assert_ne!(r.verdict, Verdict::Fail, "{r}");
    }

    #[test]
    fn rejects_too_many_samples() {
        assert!(lemma1_check(&Lemma1Config::new(5, 4, 0)).is_err());
    }
}
