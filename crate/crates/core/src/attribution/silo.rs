use serde::{Deserialize, Serialize};

use super::forest::{fit_random_forest, RandomForest};
use crate::domain::{check_label, AttributionScores, Classifier, Instance};
use crate::error::{check_len, Error, Result};
use crate::regression::weighted_ridge;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiloConfig {
    pub num_trees: usize,
    pub min_samples_leaf: usize,
    pub ridge_strength: f64,
    pub seed: u64,
}

impl Default for SiloConfig {
    fn default() -> Self {
        Self {
            num_trees: 200,
            min_samples_leaf: 10,
            ridge_strength: 1e-3,
            seed: 0,
        }
    }
}

impl SiloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::config("the forest needs at least one tree"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::config("min_samples_leaf must be at least 1"));
        }
        if !(self.ridge_strength >= 0.0 && self.ridge_strength.is_finite()) {
            return Err(Error::config("SILO ridge strength must be non-negative"));
        }
        Ok(())
    }
}

/// Weight of every training point for the query `x`: the average over trees
/// of `1 / |leaf|` when the point shares `x`'s leaf, else 0.
pub fn silo_weights(forest: &RandomForest, x: &[f64]) -> Result<Vec<f64>> {
    check_len(forest.num_features(), x.len())?;
    let mut w = vec![0.0; forest.num_samples()];
    let trees = forest.trees().len() as f64;
    for tree in forest.trees() {
        let leaf = tree.leaf_samples(x);
        let share = 1.0 / (leaf.len() as f64 * trees);
        for &j in leaf {
            w[j] += share;
        }
    }
    Ok(w)
}

/// Coefficients of the weighted ridge fit of `targets` on `rows`.
pub fn silo_fit(rows: &[Vec<f64>], targets: &[f64], weights: &[f64], ridge: f64) -> Result<Vec<f64>> {
    Ok(weighted_ridge(rows, targets, weights, ridge, true)?.coefficients)
}

/// A forest fitted on a classifier's outputs over the training points,
/// ready to explain any number of queries.
#[derive(Debug, Clone)]
pub struct SiloExplainer {
    forest: RandomForest,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    label: usize,
    ridge: f64,
}

impl SiloExplainer {
    /// Fits the forest on `C_label` evaluated at `rows`.
    pub fn fit<C: Classifier + ?Sized>(
        classifier: &C,
        rows: &[Vec<f64>],
        label: usize,
        cfg: &SiloConfig,
    ) -> Result<Self> {
        check_label(label)?;
        cfg.validate()?;
        for r in rows {
            check_len(classifier.num_features(), r.len())?;
        }
        let targets: Vec<f64> = rows.iter().map(|r| classifier.probability(r, label)).collect();
        let forest = fit_random_forest(rows, &targets, cfg)?;
        Ok(Self {
            forest,
            rows: rows.to_vec(),
            targets,
            label,
            ridge: cfg.ridge_strength,
        })
    }

    pub fn forest(&self) -> &RandomForest {
        &self.forest
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        silo_weights(&self.forest, x)
    }
}

/// SILO scores of `C_l` at `x`.
pub fn silo_scores<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    explainer: &SiloExplainer,
) -> Result<AttributionScores> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    let weights = explainer.weights(x.values())?;
    let coefs = if label == explainer.label {
        silo_fit(&explainer.rows, &explainer.targets, &weights, explainer.ridge)?
    } else {
        let targets: Vec<f64> = explainer
            .rows
            .iter()
            .map(|r| classifier.probability(r, label))
            .collect();
        silo_fit(&explainer.rows, &targets, &weights, explainer.ridge)?
    };
    AttributionScores::new(coefs, label, x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::FnClassifier;
    use crate::domain::POSITIVE;

    fn rows(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![(i as f64 * 0.61).sin() * 2.0, (i as f64 * 0.23).cos(), (i % 9) as f64 / 4.0])
            .collect()
    }

    #[test]
    fn weights_sum_to_one_per_tree() {
        let data = rows(150);
        let c = FnClassifier::new(3, |z| z[0] - 0.5 * z[1] + z[2] * z[0]);
        let cfg = SiloConfig {
            num_trees: 25,
            ..SiloConfig::default()
        };
        let e = SiloExplainer::fit(&c, &data, POSITIVE, &cfg).unwrap();
        let w = e.weights(&[0.2, 0.1, 1.0]).unwrap();
        assert!(w.iter().all(|v| *v >= 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for tree in e.forest().trees() {
            let leaf = tree.leaf_samples(&[0.2, 0.1, 1.0]);
            let per_tree: f64 = leaf.iter().map(|_| 1.0 / leaf.len() as f64).sum();
            assert!((per_tree - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_leaf_forest_is_global_fit() {
        let data = rows(40);
        let cfg = SiloConfig {
            num_trees: 1,
            min_samples_leaf: 40,
            ..SiloConfig::default()
        };
        let c = FnClassifier::new(3, |z| z[0] + z[1]);
        let e = SiloExplainer::fit(&c, &data, POSITIVE, &cfg).unwrap();
        let w = e.weights(&[0.0, 0.0, 0.0]).unwrap();
        assert!(w.iter().all(|v| (v - 1.0 / 40.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_weights_recover_linear_target() {
        let data = rows(60);
        let targets: Vec<f64> = data.iter().map(|r| 0.3 + 1.5 * r[0] - 2.0 * r[1] + 0.25 * r[2]).collect();
        let w = vec![1.0 / 60.0; 60];
        let c = silo_fit(&data, &targets, &w, 0.0).unwrap();
        for (a, b) in c.iter().zip([1.5, -2.0, 0.25]) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic_scores() {
        let data = rows(100);
        let c = FnClassifier::new(3, |z| z[0] * z[1] - z[2]);
        let cfg = SiloConfig {
            num_trees: 10,
            seed: 3,
            ..SiloConfig::default()
        };
        let x = Instance::from_values(vec![0.5, 0.5, 0.5]).unwrap();
        let a = silo_scores(&c, &x, POSITIVE, &SiloExplainer::fit(&c, &data, POSITIVE, &cfg).unwrap());
        let b = silo_scores(&c, &x, POSITIVE, &SiloExplainer::fit(&c, &data, POSITIVE, &cfg).unwrap());
        assert_eq!(a.unwrap(), b.unwrap());
    }
}
