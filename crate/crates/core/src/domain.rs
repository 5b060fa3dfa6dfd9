//! Classification problems, inputs, probability outputs and the classifier
//! and attribution contracts shared by every other module.
//!
//! Everything here is immutable once constructed. Binary problems are the
//! only ones the classifiers support: the classifier exposes the log-odds
//! `z` of the positive label and `P(positive) = sigmoid(z)`,
//! `P(negative) = sigmoid(-z)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Index of the negative label in a binary problem.
pub const NEGATIVE: usize = 0;
/// Index of the positive label in a binary problem.
pub const POSITIVE: usize = 1;

/// Continuous domain of one feature. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureDomain {
    lower: f64,
    upper: f64,
}

impl FeatureDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::config(format!(
                "feature domain requires lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }
}

impl Default for FeatureDomain {
    fn default() -> Self {
        Self::unbounded()
    }
}

/// Feature names and domains, shared between all instances of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
    domains: Vec<FeatureDomain>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, domains: Vec<FeatureDomain>) -> Result<Self> {
        check_len(names.len(), domains.len())?;
        if names.is_empty() {
            return Err(Error::config("a schema needs at least one feature"));
        }
        Ok(Self { names, domains })
    }

    /// Schema with unbounded domains for every feature.
    pub fn unbounded(names: Vec<String>) -> Result<Self> {
        let domains = vec![FeatureDomain::unbounded(); names.len()];
        Self::new(names, domains)
    }

    /// Unbounded schema with generated names `x0, x1, ...`.
    pub fn anonymous(k: usize) -> Result<Self> {
        Self::unbounded((0..k).map(|i| format!("x{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domains(&self) -> &[FeatureDomain] {
        &self.domains
    }

    /// Checks that `values` has one in-domain entry per feature.
    pub fn validate(&self, values: &[f64]) -> Result<()> {
        check_len(self.len(), values.len())?;
        for (feature, (&value, domain)) in values.iter().zip(&self.domains).enumerate() {
            if value.is_nan() || !domain.contains(value) {
                return Err(Error::OutsideDomain { feature, value });
            }
        }
        Ok(())
    }
}

/// One input vector together with its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    values: Vec<f64>,
    schema: Arc<FeatureSchema>,
}

impl Instance {
    pub fn new(values: Vec<f64>, schema: Arc<FeatureSchema>) -> Result<Self> {
        schema.validate(&values)?;
        Ok(Self { values, schema })
    }

    /// Instance over an anonymous unbounded schema.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let schema = Arc::new(FeatureSchema::anonymous(values.len())?);
        Self::new(values, schema)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn feature_names(&self) -> &[String] {
        self.schema.names()
    }

    /// A new instance over the same schema.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, Arc::clone(&self.schema))
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Returns `(x_{-i}, v)`: a copy of `x` whose `i`-th component is `v`.
pub fn replace_feature(x: &Instance, i: usize, v: f64) -> Result<Instance> {
    if i >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: x.len(),
        });
    }
    if v.is_nan() || !x.schema.domains()[i].contains(v) {
        return Err(Error::OutsideDomain {
            feature: i,
            value: v,
        });
    }
    let mut values = x.values.clone();
    values[i] = v;
    Ok(Instance {
        values,
        schema: Arc::clone(&x.schema),
    })
}

/// Domains, label set and training examples.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationProblem {
    schema: Arc<FeatureSchema>,
    labels: Vec<String>,
    features: Vec<Vec<f64>>,
    targets: Vec<usize>,
}

impl ClassificationProblem {
    pub fn new(
        schema: Arc<FeatureSchema>,
        labels: Vec<String>,
        features: Vec<Vec<f64>>,
        targets: Vec<usize>,
    ) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::data("a classification problem needs at least two labels"));
        }
        check_len(features.len(), targets.len())?;
        for (row, values) in features.iter().enumerate() {
            schema.validate(values).map_err(|e| match e {
                Error::DimensionMismatch { expected, got } => Error::data(format!(
                    "example {row} has {got} values, expected {expected}"
                )),
                Error::OutsideDomain { feature, value } => Error::data(format!(
                    "example {row}: value {value} of feature {feature} outside its domain"
                )),
                other => other,
            })?;
        }
        if let Some((row, &label)) = targets.iter().enumerate().find(|(_, &l)| l >= labels.len()) {
            return Err(Error::data(format!(
                "example {row} has label index {label} but only {} labels exist",
                labels.len()
            )));
        }
        Ok(Self {
            schema,
            labels,
            features,
            targets,
        })
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn num_features(&self) -> usize {
        self.schema.len()
    }

    pub fn feature_names(&self) -> &[String] {
        self.schema.names()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_binary(&self) -> bool {
        self.labels.len() == 2
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn instance(&self, row: usize) -> Result<Instance> {
        let values = self.features.get(row).ok_or(Error::IndexOutOfRange {
            index: row,
            len: self.len(),
        })?;
        Ok(Instance {
            values: values.clone(),
            schema: Arc::clone(&self.schema),
        })
    }

    pub fn instances(&self) -> impl Iterator<Item = Instance> + '_ {
        self.features.iter().map(|v| Instance {
            values: v.clone(),
            schema: Arc::clone(&self.schema),
        })
    }

    /// Subset of the examples in the given row order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len());
        let mut targets = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    len: self.len(),
                });
            }
            features.push(self.features[r].clone());
            targets.push(self.targets[r]);
        }
        Ok(Self {
            schema: Arc::clone(&self.schema),
            labels: self.labels.clone(),
            features,
            targets,
        })
    }

    /// Same labels and schema, new feature rows.
    pub fn with_features(&self, features: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            Arc::clone(&self.schema),
            self.labels.clone(),
            features,
            self.targets.clone(),
        )
    }
}

/// One probability per label, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::data("a probability vector needs at least two entries"));
        }
        if entries.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Numerical(format!("probability outside [0, 1]: {entries:?}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!("probabilities sum to {total}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, label: usize) -> Option<f64> {
        self.entries.get(label).copied()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.entries.iter().enumerate() {
            if p > self.entries[best] {
                best = i;
            }
        }
        best
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the logistic function, `sigmoid(z) * (1 - sigmoid(z))`.
pub fn sigmoid_derivative(z: f64) -> f64 {
    sigmoid(z) * sigmoid(-z)
}

/// A binary probabilistic classifier with a single sigmoid output.
///
/// Implementors return the log-odds of the positive label. Probabilities
/// and the per-label monotone comparison key are derived from it, so
/// `C_0(x) + C_1(x) = 1` holds by construction.
pub trait Classifier: Send + Sync {
    fn num_features(&self) -> usize;

    /// Log-odds `z` of the positive label, `P(positive | x) = sigmoid(z)`.
    fn log_odds(&self, x: &[f64]) -> f64;

    /// `C_l(x)`.
    fn probability(&self, x: &[f64], label: usize) -> f64 {
        sigmoid(self.label_log_odds(x, label))
    }

    /// Log-odds of `label`; strictly increasing in `C_l(x)`.
    fn label_log_odds(&self, x: &[f64], label: usize) -> f64 {
        let z = self.log_odds(x);
        if label == POSITIVE {
            z
        } else {
            -z
        }
    }

    /// Analytic gradient of `C_l` at `x`, when the model provides one.
    fn gradient(&self, _x: &[f64], _label: usize) -> Option<Vec<f64>> {
        None
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn num_features(&self) -> usize {
        (**self).num_features()
    }
    fn log_odds(&self, x: &[f64]) -> f64 {
        (**self).log_odds(x)
    }
    fn probability(&self, x: &[f64], label: usize) -> f64 {
        (**self).probability(x, label)
    }
    fn label_log_odds(&self, x: &[f64], label: usize) -> f64 {
        (**self).label_log_odds(x, label)
    }
    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        (**self).gradient(x, label)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn num_features(&self) -> usize {
        (**self).num_features()
    }
    fn log_odds(&self, x: &[f64]) -> f64 {
        (**self).log_odds(x)
    }
    fn probability(&self, x: &[f64], label: usize) -> f64 {
        (**self).probability(x, label)
    }
    fn label_log_odds(&self, x: &[f64], label: usize) -> f64 {
        (**self).label_log_odds(x, label)
    }
    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        (**self).gradient(x, label)
    }
}

pub(crate) fn check_label(label: usize) -> Result<()> {
    if label > POSITIVE {
        return Err(Error::config(format!(
            "label index {label} is not valid for a binary classifier"
        )));
    }
    Ok(())
}

/// `C(x, .)` as a probability vector over the two labels.
pub fn predict<C: Classifier + ?Sized>(classifier: &C, x: &Instance) -> Result<ProbabilityVector> {
    check_len(classifier.num_features(), x.len())?;
    let z = classifier.log_odds(x.values());
    if z.is_nan() {
        return Err(Error::Numerical("classifier produced NaN log-odds".into()));
    }
    ProbabilityVector::new(vec![sigmoid(-z), sigmoid(z)])
}

/// Per-feature scores `s_{C,l}(x)` for one explained input and label.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionScores {
    scores: Vec<f64>,
    label: usize,
    input: Instance,
}

impl AttributionScores {
    pub fn new(scores: Vec<f64>, label: usize, input: Instance) -> Result<Self> {
        check_len(input.len(), scores.len())?;
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Numerical(format!(
                "score of feature {i} is not finite: {}",
                scores[i]
            )));
        }
        Ok(Self {
            scores,
            label,
            input,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn input(&self) -> &Instance {
        &self.input
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Same input and label, different scores.
    pub fn with_scores(&self, scores: Vec<f64>) -> Result<Self> {
        Self::new(scores, self.label, self.input.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Squared;

    impl Classifier for Squared {
        fn num_features(&self) -> usize {
            1
        }
        fn log_odds(&self, x: &[f64]) -> f64 {
            x[0] * x[0]
        }
    }

    #[test]
    fn replace_substitutes_one_component() {
        let x = Instance::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        let y = replace_feature(&x, 1, 9.0).unwrap();
        assert_eq!(y.values(), &[1.0, 9.0, 3.0]);
        assert_eq!(x.values(), &[1.0, 2.0, 3.0]);
        let same = replace_feature(&x, 0, 1.0).unwrap();
        assert_eq!(same.values(), x.values());
    }

    #[test]
    fn replace_then_predict_nonmonotone() {
        let x = Instance::from_values(vec![-0.5]).unwrap();
        let y = replace_feature(&x, 0, 0.0).unwrap();
        let p = predict(&Squared, &y).unwrap();
        assert_eq!(p.get(POSITIVE), Some(0.5));
    }

    #[test]
    fn replace_rejects_bad_index_and_domain() {
        let schema = Arc::new(
            FeatureSchema::new(
                vec!["a".into(), "b".into()],
                vec![FeatureDomain::new(0.0, 1.0).unwrap(), FeatureDomain::unbounded()],
            )
            .unwrap(),
        );
        let x = Instance::new(vec![0.5, 10.0], schema).unwrap();
        assert!(matches!(
            replace_feature(&x, 2, 0.0),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(matches!(
            replace_feature(&x, 0, 1.5),
            Err(Error::OutsideDomain { feature: 0, .. })
        ));
        assert!(replace_feature(&x, 1, -1e300).is_ok());
    }

    #[test]
    fn domain_requires_ordered_bounds() {
        assert!(FeatureDomain::new(1.0, 1.0).is_err());
        assert!(FeatureDomain::new(f64::NEG_INFINITY, 0.0).is_ok());
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let x = Instance::from_values(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            predict(&Squared, &x),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn nonmonotone_reference_values() {
        let p = |v: f64| predict(&Squared, &Instance::from_values(vec![v]).unwrap()).unwrap();
        assert!((p(-0.5).entries()[1] - 0.5622).abs() < 1e-4);
        assert!((p(1.0).entries()[1] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn problem_validation() {
        let schema = Arc::new(FeatureSchema::anonymous(2).unwrap());
        let labels = vec!["n".to_string(), "p".to_string()];
        assert!(ClassificationProblem::new(
            Arc::clone(&schema),
            labels.clone(),
            vec![vec![1.0, 2.0]],
            vec![2]
        )
        .is_err());
        assert!(ClassificationProblem::new(
            Arc::clone(&schema),
            vec!["only".into()],
            vec![vec![1.0, 2.0]],
            vec![0]
        )
        .is_err());
        assert!(ClassificationProblem::new(schema, labels, vec![vec![1.0]], vec![0]).is_err());
    }

    #[test]
    fn probability_vector_checks_sum() {
        assert!(ProbabilityVector::new(vec![0.3, 0.3]).is_err());
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn scores_must_be_finite() {
        let x = Instance::from_values(vec![0.0, 0.0]).unwrap();
        assert!(AttributionScores::new(vec![1.0, f64::NAN], 1, x.clone()).is_err());
        assert!(AttributionScores::new(vec![1.0], 1, x).is_err());
    }
}
