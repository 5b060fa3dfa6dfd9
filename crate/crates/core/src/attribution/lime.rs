use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{check_label, AttributionScores, Classifier, Instance};
use crate::error::{check_len, Error, Result};
use crate::regression::weighted_ridge;

/// Settings of the perturbation surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub num_samples: usize,
    /// `None` selects `0.75 * sqrt(k)`.
    pub kernel_width: Option<f64>,
    /// Standard deviation of the additive Gaussian noise.
    pub perturbation_scale: f64,
    pub seed: u64,
    pub l2_strength: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            num_samples: 5000,
            kernel_width: None,
            perturbation_scale: 1.0,
            seed: 0,
            l2_strength: 1e-3,
        }
    }
}

impl LimeConfig {
    pub fn width_for(&self, k: usize) -> f64 {
        self.kernel_width.unwrap_or(0.75 * (k as f64).sqrt())
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.num_samples < k + 1 {
            return Err(Error::config(format!(
                "LIME needs at least {} samples for {k} features, got {}",
                k + 1,
                self.num_samples
            )));
        }
        let w = self.width_for(k);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::config(format!("kernel width must be positive, got {w}")));
        }
        if !(self.perturbation_scale > 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::config("perturbation scale must be positive"));
        }
        if self.l2_strength.is_nan() || self.l2_strength < 0.0 {
            return Err(Error::config("LIME ridge strength must be non-negative"));
        }
        Ok(())
    }
}

/// Coefficients of a kernel-weighted ridge fit of `f` around `x`.
///
/// The first sample is `x` itself; the rest add independent Gaussian noise
/// of scale `perturbation_scale` to every coordinate. No discretization is
/// applied. Sample weight is `exp(-d^2 / width^2)` with `d` the Euclidean
/// distance to `x`.
pub fn lime_fit<F>(f: F, x: &[f64], cfg: &LimeConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let k = x.len();
    cfg.validate(k)?;
    let width2 = cfg.width_for(k).powi(2);
    let noise = Normal::new(0.0, cfg.perturbation_scale)
        .map_err(|e| Error::config(format!("perturbation scale: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut rows = Vec::with_capacity(cfg.num_samples);
    let mut targets = Vec::with_capacity(cfg.num_samples);
    let mut weights = Vec::with_capacity(cfg.num_samples);
    rows.push(x.to_vec());
    targets.push(f(x));
    weights.push(1.0);
    for _ in 1..cfg.num_samples {
        let mut d2 = 0.0;
        let z: Vec<f64> = x
            .iter()
            .map(|v| {
                let e = noise.sample(&mut rng);
                d2 += e * e;
                v + e
            })
            .collect();
        targets.push(f(&z));
        weights.push((-d2 / width2).exp());
        rows.push(z);
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::Numerical("target function returned a non-finite value".into()));
    }
    Ok(weighted_ridge(&rows, &targets, &weights, cfg.l2_strength, true)?.coefficients)
}

/// LIME scores of `C_l` at `x`.
pub fn lime_scores<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    cfg: &LimeConfig,
) -> Result<AttributionScores> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    let coefs = lime_fit(|z| classifier.probability(z, label), x.values(), cfg)?;
    AttributionScores::new(coefs, label, x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::FnClassifier;
    use crate::domain::POSITIVE;

    #[test]
    fn recovers_linear_target() {
        let cfg = LimeConfig {
            num_samples: 10_000,
            l2_strength: 0.0,
            seed: 5,
            ..LimeConfig::default()
        };
        let c = lime_fit(|z| 2.0 * z[0] - z[1], &[0.4, -1.3], &cfg).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-2);
        assert!((c[1] + 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_classifier_gives_zero() {
        let c = FnClassifier::constant(3, 1.2);
        let x = Instance::from_values(vec![0.1, 0.2, 0.3]).unwrap();
        let s = lime_scores(&c, &x, POSITIVE, &LimeConfig::default()).unwrap();
        assert!(s.scores().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn deterministic_for_seed() {
        let c = FnClassifier::new(2, |z| z[0] * z[1] + z[0]);
        let x = Instance::from_values(vec![0.5, -0.5]).unwrap();
        let cfg = LimeConfig {
            seed: 9,
            ..LimeConfig::default()
        };
        let a = lime_scores(&c, &x, POSITIVE, &cfg).unwrap();
        let b = lime_scores(&c, &x, POSITIVE, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_samples() {
        let cfg = LimeConfig {
            num_samples: 3,
            ..LimeConfig::default()
        };
        assert!(lime_fit(|z| z[0], &[0.0, 0.0, 0.0], &cfg).is_err());
    }
}
