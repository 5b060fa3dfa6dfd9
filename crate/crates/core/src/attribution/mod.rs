//! Feature attribution methods: analytic gradients, LIME-style local
//! surrogates, SILO forest-weighted surrogates and Kernel SHAP.
//!
//! Every explainer is a deterministic function of its inputs and an explicit
//! seed. The `*_fit` / `*_values` variants operate on plain closures so the
//! estimators can be checked against raw (unsquashed) target functions.

mod forest;
mod lime;
mod shap;
mod silo;
mod suite;

pub use forest::{fit_random_forest, DecisionTree, RandomForest, TreeNode};
pub use lime::{lime_fit, lime_scores, LimeConfig};
pub use shap::{
    kernel_shap_scores, kernel_shap_values, sample_background, ShapConfig, ShapMode, ShapValues,
    EXACT_MAX_FEATURES,
};
pub use silo::{silo_fit, silo_scores, silo_weights, SiloConfig, SiloExplainer};
pub use suite::{instance_seed, ExplainerSuite, ScoreTable};

use std::fmt;
use std::str::FromStr;

use crate::classifiers::finite_diff_gradient;
use crate::domain::{check_label, AttributionScores, Classifier, Instance};
use crate::error::{check_len, Error, Result};

/// The attribution methods, in the column order used by every table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Grad,
    Silo,
    Lime,
    Shap,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Grad, Method::Silo, Method::Lime, Method::Shap];

    pub fn name(self) -> &'static str {
        match self {
            Method::Grad => "grad",
            Method::Silo => "silo",
            Method::Lime => "lime",
            Method::Shap => "shap",
        }
    }

    /// Upper-case column heading.
    pub fn heading(self) -> &'static str {
        match self {
            Method::Grad => "GRAD",
            Method::Silo => "SILO",
            Method::Lime => "LIME",
            Method::Shap => "SHAP",
        }
    }

    /// Parses a comma-separated list such as `grad,lime`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Method = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::config("the methods list is empty"));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grad" | "gradient" => Ok(Method::Grad),
            "silo" => Ok(Method::Silo),
            "lime" => Ok(Method::Lime),
            "shap" => Ok(Method::Shap),
            other => Err(Error::config(format!("unknown attribution method '{other}'"))),
        }
    }
}

/// Gradient-scoring: `s(x) = grad C_l(x)`.
///
/// Uses the classifier's analytic gradient when it has one, otherwise the
/// symmetric difference with step `fallback_eps`.
pub fn gradient_scores<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    fallback_eps: Option<f64>,
) -> Result<AttributionScores> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    let scores = match classifier.gradient(x.values(), label) {
        Some(g) => g,
        None => {
            let eps = fallback_eps.ok_or(Error::NotDifferentiable)?;
            finite_diff_gradient(classifier, x, label, eps)?
        }
    };
    AttributionScores::new(scores, label, x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{squared_logistic, FnClassifier, LogisticRegressionModel};
    use crate::domain::POSITIVE;

    #[test]
    fn squared_logistic_is_flat_at_origin() {
        let c = squared_logistic();
        let x = Instance::from_values(vec![0.0]).unwrap();
        assert_eq!(gradient_scores(&c, &x, POSITIVE, None).unwrap().scores(), &[0.0]);
    }

    #[test]
    fn constant_classifier_scores_zero() {
        let c = FnClassifier::constant(3, 0.4);
        let x = Instance::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        let s = gradient_scores(&c, &x, POSITIVE, None).unwrap();
        assert!(s.scores().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn falls_back_to_finite_differences() {
        let c = FnClassifier::new(2, |x| x[0] - 2.0 * x[1]);
        let x = Instance::from_values(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            gradient_scores(&c, &x, POSITIVE, None),
            Err(Error::NotDifferentiable)
        ));
        let s = gradient_scores(&c, &x, POSITIVE, Some(1e-5)).unwrap();
        assert!((s.scores()[0] - 0.25).abs() < 1e-9);
        assert!((s.scores()[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn table_weights_reproduce_scores() {
        // Weights of a published banknote model; the scores share one
        // positive factor sigmoid'(z).
        let w = vec![-10.240, -7.508, -7.001, 0.284];
        let m = LogisticRegressionModel::from_parameters(w.clone(), 0.0).unwrap();
        let x = Instance::from_values(vec![0.1, -0.2, 0.3, 0.05]).unwrap();
        let s = gradient_scores(&m, &x, POSITIVE, None).unwrap();
        let ratio = s.scores()[0] / w[0];
        for (si, wi) in s.scores().iter().zip(&w) {
            assert!((si / wi - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn method_lists() {
        assert_eq!(
            Method::parse_list("lime, grad,lime").unwrap(),
            vec![Method::Lime, Method::Grad]
        );
        assert!(Method::parse_list("").is_err());
        assert!(Method::parse_list("grad,ig").is_err());
    }
}
