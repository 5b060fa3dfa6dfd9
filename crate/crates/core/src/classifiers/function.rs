use crate::domain::{sigmoid_derivative, Classifier, POSITIVE};

type LogOdds = dyn Fn(&[f64]) -> f64 + Send + Sync;
type Gradient = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Classifier defined by a closure returning the positive log-odds, with an
/// optional closure for the gradient of `P(positive)`.
pub struct FnClassifier {
    features: usize,
    log_odds: Box<LogOdds>,
    gradient: Option<Box<Gradient>>,
}

impl FnClassifier {
    pub fn new(features: usize, log_odds: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            features,
            log_odds: Box::new(log_odds),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    /// Classifier whose output ignores the input.
    pub fn constant(features: usize, log_odds: f64) -> Self {
        Self::new(features, move |_| log_odds).with_gradient(move |x| vec![0.0; x.len()])
    }
}

impl std::fmt::Debug for FnClassifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnClassifier")
            .field("features", &self.features)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Classifier for FnClassifier {
    fn num_features(&self) -> usize {
        self.features
    }

    fn log_odds(&self, x: &[f64]) -> f64 {
        (self.log_odds)(x)
    }

    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        let g = self.gradient.as_ref()?(x);
        Some(if label == POSITIVE {
            g
        } else {
            g.into_iter().map(|v| -v).collect()
        })
    }
}

/// The single-feature non-monotone classifier `C(x) = sigmoid(x^2)`:
/// decreasing for `x < 0`, increasing for `x > 0`.
pub fn squared_logistic() -> FnClassifier {
    FnClassifier::new(1, |x| x[0] * x[0])
        .with_gradient(|x| vec![2.0 * x[0] * sigmoid_derivative(x[0] * x[0])])
}
