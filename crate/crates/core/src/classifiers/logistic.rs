use crate::domain::{
    check_label, sigmoid, sigmoid_derivative, ClassificationProblem, Classifier, Instance, POSITIVE,
};
use crate::error::{check_len, Error, Result};

use super::{log_loss, require_binary, TrainConfig, TrainSummary};

/// `C(x) = sigmoid(w . x + b)` for the positive label.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegressionModel {
    weights: Vec<f64>,
    bias: f64,
    labels: [String; 2],
}

impl LogisticRegressionModel {
    pub fn new(weights: Vec<f64>, bias: f64, labels: [String; 2]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("logistic regression needs at least one weight"));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("logistic regression parameters must be finite".into()));
        }
        Ok(Self {
            weights,
            bias,
            labels,
        })
    }

    /// Model with default label names `0` / `1`.
    pub fn from_parameters(weights: Vec<f64>, bias: f64) -> Result<Self> {
        Self::new(weights, bias, ["0".into(), "1".into()])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// `(negative, positive)` label names.
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    fn linear(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

impl Classifier for LogisticRegressionModel {
    fn num_features(&self) -> usize {
        self.weights.len()
    }

    fn log_odds(&self, x: &[f64]) -> f64 {
        self.linear(x)
    }

    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        let slope = sigmoid_derivative(self.linear(x));
        let sign = if label == POSITIVE { 1.0 } else { -1.0 };
        Some(self.weights.iter().map(|w| sign * w * slope).collect())
    }
}

/// `dC/dx_i = w_i * sigmoid'(w . x + b)` for the positive label.
pub fn lr_gradient(model: &LogisticRegressionModel, x: &Instance) -> Result<Vec<f64>> {
    check_len(model.num_features(), x.len())?;
    let slope = sigmoid_derivative(model.linear(x.values()));
    Ok(model.weights.iter().map(|w| w * slope).collect())
}

/// Full-batch gradient descent with backtracking on the L2-penalized
/// negative log-likelihood. The penalty skips the bias.
///
/// The objective is scaled by `1/N`, so `l2_strength = 1` matches an
/// inverse regularization strength `C = 1` on the summed loss.
pub fn train_logistic_regression(
    problem: &ClassificationProblem,
    cfg: &TrainConfig,
) -> Result<(LogisticRegressionModel, TrainSummary)> {
    cfg.validate()?;
    require_binary(problem)?;
    let k = problem.num_features();
    let n = problem.len() as f64;
    let xs = problem.features();
    let ys: Vec<f64> = problem.targets().iter().map(|&t| t as f64).collect();
    let penalty = cfg.l2_strength / n;

    let objective = |w: &[f64], b: f64| -> f64 {
        let data: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, &y)| {
                let z = w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b;
                log_loss(z, y)
            })
            .sum::<f64>()
            / n;
        data + 0.5 * penalty * w.iter().map(|v| v * v).sum::<f64>()
    };
    let gradient = |w: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut gw = vec![0.0; k];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(&ys) {
            let z = w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b;
            let r = sigmoid(z) - y;
            gb += r;
            for (g, v) in gw.iter_mut().zip(x) {
                *g += r * v;
            }
        }
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = *g / n + penalty * wi;
        }
        (gw, gb / n)
    };

    let mut w = vec![0.0; k];
    let mut b = 0.0;
    let mut loss = objective(&w, b);
    let mut step = cfg.learning_rate;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        let (gw, gb) = gradient(&w, b);
        let grad_inf = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if grad_inf < cfg.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let grad_sq = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        let mut accepted = false;
        for _ in 0..60 {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
            let cand_b = b - step * gb;
            let cand_loss = objective(&cand_w, cand_b);
            if cand_loss <= loss - 0.5 * step * grad_sq {
                w = cand_w;
                b = cand_b;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !loss.is_finite() {
            return Err(Error::Numerical("training loss diverged".into()));
        }
        if !accepted {
            // No descent step exists at machine precision.
            converged = true;
            break;
        }
        step *= 2.0;
    }

    let labels = [problem.labels()[0].clone(), problem.labels()[1].clone()];
    let model = LogisticRegressionModel::new(w, b, labels)?;
    Ok((
        model,
        TrainSummary {
            iterations,
            final_loss: loss,
            converged,
        },
    ))
}

impl LogisticRegressionModel {
    /// Gradient of `C_l`, validated against the label set.
    pub fn label_gradient(&self, x: &Instance, label: usize) -> Result<Vec<f64>> {
        check_label(label)?;
        check_len(self.num_features(), x.len())?;
        Ok(self.gradient(x.values(), label).expect("analytic gradient"))
    }
}
