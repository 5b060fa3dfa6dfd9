//! Trainable differentiable classifiers with analytic gradients, plus the
//! symmetric-difference fallback used for classifiers without one.

mod finite_diff;
mod function;
pub mod io;
mod logistic;
mod mlp;

pub use finite_diff::{finite_diff_gradient, symmetric_difference};
pub use function::{squared_logistic, FnClassifier};
pub use logistic::{lr_gradient, train_logistic_regression, LogisticRegressionModel};
pub use mlp::{mlp_gradient, train_mlp, Activation, DenseLayer, MlpModel};

use serde::{Deserialize, Serialize};

use crate::domain::Classifier;
use crate::error::{Error, Result};

/// Optimizer settings shared by both trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Gradient steps for logistic regression, epochs for the MLP.
    pub max_iterations: usize,
    /// Initial step of the backtracking search (LR) or SGD step size (MLP).
    pub learning_rate: f64,
    pub l2_strength: f64,
    pub seed: u64,
    /// Gradient-norm threshold (LR) or minimum epoch loss improvement (MLP).
    pub tolerance: f64,
}

impl TrainConfig {
    /// Full-batch logistic regression: 500 iterations, L2 strength 1.
    pub fn logistic_default() -> Self {
        Self {
            max_iterations: 500,
            learning_rate: 1.0,
            l2_strength: 1.0,
            seed: 42,
            tolerance: 1e-6,
        }
    }

    /// Mini-batch MLP training: up to 1000 epochs with a fairly strong L2
    /// penalty, which keeps the fitted surface smooth around test points.
    pub fn mlp_default() -> Self {
        Self {
            max_iterations: 1000,
            learning_rate: 1e-3,
            l2_strength: 0.3,
            seed: 42,
            tolerance: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(self.l2_strength >= 0.0 && self.l2_strength.is_finite()) {
            return Err(Error::config("l2_strength must be non-negative"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::config("tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// What a training run reports besides the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSummary {
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
}

/// A trained model of either supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Logistic(LogisticRegressionModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Logistic(_) => "logistic_regression",
            Model::Mlp(_) => "mlp",
        }
    }

    pub fn as_logistic(&self) -> Option<&LogisticRegressionModel> {
        match self {
            Model::Logistic(m) => Some(m),
            Model::Mlp(_) => None,
        }
    }
}

impl Classifier for Model {
    fn num_features(&self) -> usize {
        match self {
            Model::Logistic(m) => m.num_features(),
            Model::Mlp(m) => m.num_features(),
        }
    }

    fn log_odds(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) => m.log_odds(x),
            Model::Mlp(m) => m.log_odds(x),
        }
    }

    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        match self {
            Model::Logistic(m) => m.gradient(x, label),
            Model::Mlp(m) => m.gradient(x, label),
        }
    }
}

pub(crate) fn log_loss(z: f64, target: f64) -> f64 {
    // softplus(z) - y z
    z.max(0.0) + (-z.abs()).exp().ln_1p() - target * z
}

pub(crate) fn require_binary(problem: &crate::domain::ClassificationProblem) -> Result<()> {
    if !problem.is_binary() {
        return Err(Error::data(format!(
            "binary problem required, found {} labels",
            problem.labels().len()
        )));
    }
    if problem.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    if problem.features().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::data("training features must be finite"));
    }
    Ok(())
}
