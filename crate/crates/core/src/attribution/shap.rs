//! Kernel SHAP against an interventional background.
//!
//! The coalition value is `v(S) = mean_b f(x_S, b_{-S})` over the background
//! rows `b`. Attributions solve the Shapley-kernel weighted regression of
//! `v(S) - v(empty)` on the coalition indicators, with the efficiency
//! constraint `sum(phi) = v(full) - v(empty)` eliminated into the last
//! coefficient so it holds exactly. With every coalition enumerated the
//! solution equals the classic Shapley values of `v`.

use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{check_label, AttributionScores, Classifier, Instance};
use crate::error::{check_len, Error, Result};
use crate::regression::weighted_ridge;

/// Largest feature count for which all `2^k` coalitions are enumerated.
pub const EXACT_MAX_FEATURES: usize = 15;

const SAMPLED_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapMode {
    Exact,
    /// Number of sampled coalitions, drawn as complementary pairs.
    Sampled(usize),
}

impl ShapMode {
    /// Exact enumeration when feasible, otherwise 2048 paired samples.
    pub fn auto(k: usize) -> Self {
        if k <= EXACT_MAX_FEATURES {
            ShapMode::Exact
        } else {
            ShapMode::Sampled(2048)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapConfig {
    pub background: Vec<Vec<f64>>,
    pub mode: ShapMode,
    pub seed: u64,
}

impl ShapConfig {
    pub fn new(background: Vec<Vec<f64>>, mode: ShapMode, seed: u64) -> Self {
        Self {
            background,
            mode,
            seed,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.background.is_empty() {
            return Err(Error::config("the SHAP background set is empty"));
        }
        for b in &self.background {
            check_len(k, b.len())?;
        }
        match self.mode {
            ShapMode::Exact if k > EXACT_MAX_FEATURES => Err(Error::config(format!(
                "exact Kernel SHAP supports at most {EXACT_MAX_FEATURES} features, got {k}"
            ))),
            ShapMode::Sampled(_) if k > 64 => {
                Err(Error::config("sampled Kernel SHAP supports at most 64 features"))
            }
            ShapMode::Sampled(n) if n < 2 => {
                Err(Error::config("sampled Kernel SHAP needs at least two coalitions"))
            }
            _ => Ok(()),
        }
    }
}

/// Seeded uniform subsample of `n` rows without replacement, in row order.
/// All rows are returned when there are at most `n`.
pub fn sample_background(rows: &[Vec<f64>], n: usize, seed: u64) -> Vec<Vec<f64>> {
    if rows.len() <= n {
        return rows.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, rows.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| rows[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapValues {
    pub phi: Vec<f64>,
    /// `v(empty)`: the mean prediction over the background.
    pub base_value: f64,
    /// `v(full) = f(x)`.
    pub full_value: f64,
    /// Distinct coalitions whose value was computed.
    pub evaluations: usize,
}

struct Coalitions<'a, F> {
    f: F,
    x: &'a [f64],
    background: &'a [Vec<f64>],
    cache: HashMap<u64, f64>,
    scratch: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Coalitions<'_, F> {
    fn value(&mut self, mask: u64) -> f64 {
        if let Some(v) = self.cache.get(&mask) {
            return *v;
        }
        let mut total = 0.0;
        for b in self.background {
            for (i, z) in self.scratch.iter_mut().enumerate() {
                *z = if mask >> i & 1 == 1 { self.x[i] } else { b[i] };
            }
            total += (self.f)(&self.scratch);
        }
        let v = total / self.background.len() as f64;
        self.cache.insert(mask, v);
        v
    }
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shapley kernel weight of a coalition of size `s` out of `k`.
fn kernel_weight(k: usize, s: usize) -> f64 {
    (k - 1) as f64 / (binomial(k, s) * s as f64 * (k - s) as f64)
}

/// Kernel SHAP values of an arbitrary function.
pub fn kernel_shap_values<F>(f: F, x: &[f64], cfg: &ShapConfig) -> Result<ShapValues>
where
    F: Fn(&[f64]) -> f64,
{
    let k = x.len();
    if k == 0 {
        return Err(Error::config("cannot explain an input without features"));
    }
    cfg.validate(k)?;
    let full_mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut game = Coalitions {
        f,
        x,
        background: &cfg.background,
        cache: HashMap::new(),
        scratch: vec![0.0; k],
    };
    let base = game.value(0);
    let full = game.value(full_mask);
    let delta = full - base;
    if !base.is_finite() || !full.is_finite() {
        return Err(Error::Numerical("coalition value is not finite".into()));
    }
    if k == 1 {
        return Ok(ShapValues {
            phi: vec![delta],
            base_value: base,
            full_value: full,
            evaluations: game.cache.len(),
        });
    }

    let mut masks = Vec::new();
    let mut weights = Vec::new();
    match cfg.mode {
        ShapMode::Exact => {
            for mask in 1..full_mask {
                masks.push(mask);
                weights.push(kernel_weight(k, mask.count_ones() as usize));
            }
        }
        ShapMode::Sampled(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let size_mass: Vec<f64> = (1..k).map(|s| 1.0 / (s * (k - s)) as f64).collect();
            let total: f64 = size_mass.iter().sum();
            for _ in 0..n / 2 {
                let mut u = rng.random::<f64>() * total;
                let mut s = k - 1;
                for (i, m) in size_mass.iter().enumerate() {
                    if u < *m {
                        s = i + 1;
                        break;
                    }
                    u -= m;
                }
                let mask = index::sample(&mut rng, k, s)
                    .into_iter()
                    .fold(0u64, |m, i| m | 1 << i);
                masks.push(mask);
                masks.push(full_mask ^ mask);
                weights.extend([1.0, 1.0]);
            }
        }
    }

    let last = k - 1;
    let mut rows = Vec::with_capacity(masks.len());
    let mut targets = Vec::with_capacity(masks.len());
    for &mask in &masks {
        let z_last = (mask >> last & 1) as f64;
        rows.push(
            (0..last)
                .map(|i| (mask >> i & 1) as f64 - z_last)
                .collect::<Vec<f64>>(),
        );
        targets.push(game.value(mask) - base - z_last * delta);
    }
    // Sampled designs can be rank deficient (fewer distinct coalitions than
    // features); a tiny ridge keeps them solvable. Efficiency is unaffected
    // because the last value is recovered from the others.
    let ridge = match cfg.mode {
        ShapMode::Exact => 0.0,
        ShapMode::Sampled(_) => SAMPLED_RIDGE,
    };
    let fit = weighted_ridge(&rows, &targets, &weights, ridge, false)?;
    let mut phi = fit.coefficients;
    phi.push(delta - phi.iter().sum::<f64>());
    Ok(ShapValues {
        phi,
        base_value: base,
        full_value: full,
        evaluations: game.cache.len(),
    })
}

/// Kernel SHAP scores of `C_l` at `x`.
pub fn kernel_shap_scores<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    cfg: &ShapConfig,
) -> Result<AttributionScores> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    let values = kernel_shap_values(|z| classifier.probability(z, label), x.values(), cfg)?;
    AttributionScores::new(values.phi, label, x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(background: Vec<Vec<f64>>) -> ShapConfig {
        ShapConfig::new(background, ShapMode::Exact, 0)
    }

    #[test]
    fn linear_function_against_origin() {
        let v = kernel_shap_values(|z| 2.0 * z[0] + 3.0 * z[1], &[1.0, 1.0], &exact(vec![vec![0.0, 0.0]]))
            .unwrap();
        assert!((v.phi[0] - 2.0).abs() < 1e-12);
        assert!((v.phi[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_features_share_credit() {
        let v = kernel_shap_values(|z| z[0] + z[1], &[1.0, 1.0], &exact(vec![vec![0.0, 0.0]])).unwrap();
        assert!((v.phi[0] - 1.0).abs() < 1e-12);
        assert!((v.phi[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dummy_feature_gets_nothing() {
        let bg = vec![vec![0.3, -1.0, 2.0], vec![1.0, 0.5, -0.5]];
        let v = kernel_shap_values(|z| (z[0] * z[2]).tanh(), &[1.0, 4.0, -2.0], &exact(bg)).unwrap();
        assert!(v.phi[1].abs() < 1e-12);
    }

    #[test]
    fn interaction_split_evenly() {
        // v(S) = 1 only for the full coalition: each of two players gets 1/2.
        let v = kernel_shap_values(|z| z[0] * z[1], &[1.0, 1.0], &exact(vec![vec![0.0, 0.0]])).unwrap();
        assert!((v.phi[0] - 0.5).abs() < 1e-12);
        assert!((v.phi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampled_mode_is_efficient() {
        let k = 20;
        let x: Vec<f64> = (0..k).map(|i| i as f64 / 10.0).collect();
        let bg = vec![vec![0.0; k], vec![1.0; k]];
        let f = |z: &[f64]| z.iter().enumerate().map(|(i, v)| (i as f64 * v).sin()).sum::<f64>();
        let cfg = ShapConfig::new(bg, ShapMode::Sampled(512), 4);
        let v = kernel_shap_values(f, &x, &cfg).unwrap();
        let sum: f64 = v.phi.iter().sum();
        assert!((sum - (v.full_value - v.base_value)).abs() < 1e-9);
    }

    #[test]
    fn exact_mode_rejects_wide_inputs() {
        let k = EXACT_MAX_FEATURES + 1;
        let cfg = exact(vec![vec![0.0; k]]);
        assert!(kernel_shap_values(|z| z[0], &vec![1.0; k], &cfg).is_err());
    }

    #[test]
    fn empty_background_rejected() {
        assert!(kernel_shap_values(|z| z[0], &[1.0], &exact(vec![])).is_err());
    }

    #[test]
    fn background_subsample_is_seeded() {
        let rows: Vec<Vec<f64>> = (0..500).map(|i| vec![i as f64]).collect();
        let a = sample_background(&rows, 100, 7);
        assert_eq!(a.len(), 100);
        assert_eq!(a, sample_background(&rows, 100, 7));
        assert_ne!(a, sample_background(&rows, 100, 8));
        assert_eq!(sample_background(&rows[..50], 100, 7).len(), 50);
    }

    #[test]
    fn few_samples_still_sum_to_the_gap() {
        let x = vec![0.5; 12];
        let cfg = ShapConfig::new(vec![vec![0.0; 12]], ShapMode::Sampled(4), 3);
        let v = kernel_shap_values(|z| z.iter().map(|a| a * a).sum::<f64>().sin(), &x, &cfg).unwrap();
        let total: f64 = v.phi.iter().sum();
        assert!((total - (v.full_value - v.base_value)).abs() < 1e-12);
    }
}
