use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::ClassificationProblem;
use crate::error::{check_len, Error, Result};

/// How rows are divided into train and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
            shuffle: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }

    /// Number of test rows out of `n`; the fractional part rounds up.
    pub fn test_size(&self, n: usize) -> usize {
        (n as f64 * self.test_fraction).ceil() as usize
    }

    /// `(train, test)` row indices into the original problem.
    pub fn partition(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        self.validate()?;
        let n_test = self.test_size(n);
        if n_test == 0 || n_test >= n {
            return Err(Error::data(format!(
                "{n} rows cannot be split with test fraction {}",
                self.test_fraction
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        if self.shuffle {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        }
        let test = order[..n_test].to_vec();
        let train = order[n_test..].to_vec();
        Ok((train, test))
    }
}

/// Per-feature mean and population standard deviation of a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizationStats {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        check_len(means.len(), stds.len())?;
        if let Some(i) = stds.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::data(format!("feature {i} has non-positive spread {}", stds[i])));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::data("feature means must be finite"));
        }
        Ok(Self { means, stds })
    }

    /// Statistics of `rows`; a feature without spread is an error naming it.
    pub fn fit(rows: &[Vec<f64>], names: &[String]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::data("cannot standardize an empty split"));
        }
        let k = names.len();
        let mut means = vec![0.0; k];
        for r in rows {
            check_len(k, r.len())?;
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut stds = vec![0.0; k];
        for r in rows {
            for ((s, v), m) in stds.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for (i, s) in stds.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            if *s <= 1e-12 * means[i].abs().max(1.0) {
                return Err(Error::data(format!(
                    "feature '{}' is constant on the training split",
                    names[i]
                )));
            }
        }
        Self::new(means, stds)
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    pub fn transform_problem(&self, problem: &ClassificationProblem) -> Result<ClassificationProblem> {
        check_len(self.len(), problem.num_features())?;
        problem.with_features(problem.features().iter().map(|r| self.transform(r)).collect())
    }
}

/// Standardized train and test splits with the statistics used for both.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: ClassificationProblem,
    pub test: ClassificationProblem,
    pub stats: StandardizationStats,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

pub fn split_and_standardize(problem: &ClassificationProblem, spec: &SplitSpec) -> Result<Split> {
    let (train_rows, test_rows) = spec.partition(problem.len())?;
    let raw_train = problem.select(&train_rows)?;
    let raw_test = problem.select(&test_rows)?;
    let stats = StandardizationStats::fit(raw_train.features(), problem.feature_names())?;
    Ok(Split {
        train: stats.transform_problem(&raw_train)?,
        test: stats.transform_problem(&raw_test)?,
        stats,
        train_rows,
        test_rows,
    })
}
