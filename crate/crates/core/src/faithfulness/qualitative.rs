use std::fmt;

use crate::domain::{check_label, AttributionScores, Classifier, Instance};
use crate::error::{check_len, Error, Result};

/// Probe offsets as fractions of `eps`.
pub const DEFAULT_STEP_FRACTIONS: [f64; 3] = [1.0, 0.5, 0.1];

/// Tolerance, in log-odds, below which a change in the wrong direction is
/// attributed to rounding.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureStatus {
    Consistent,
    Violated,
    /// The score is exactly zero; the plain definition constrains nothing.
    ZeroScoreUntested,
}

impl FeatureStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureStatus::Consistent => "CONSISTENT",
            FeatureStatus::Violated => "VIOLATED",
            FeatureStatus::ZeroScoreUntested => "ZERO_SCORE_UNTESTED",
        }
    }
}

impl fmt::Display for FeatureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualitativeVerdict {
    pub statuses: Vec<FeatureStatus>,
    pub epsilon_used: f64,
    /// Absolute offsets probed in each direction.
    pub probe_steps: Vec<f64>,
}

impl QualitativeVerdict {
    pub fn violations(&self) -> usize {
        self.statuses
            .iter()
            .filter(|s| **s == FeatureStatus::Violated)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

fn probe_steps(eps: f64, fractions: &[f64]) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("probe radius must be positive, got {eps}")));
    }
    if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::config("step fractions must be positive and non-empty"));
    }
    Ok(fractions.iter().map(|f| f * eps).collect())
}

/// `x` with feature `i` moved by `delta`, checked against its domain.
fn shifted(x: &Instance, i: usize, delta: f64) -> Result<Vec<f64>> {
    let mut z = x.values().to_vec();
    z[i] += delta;
    if !x.schema().domains()[i].contains(z[i]) {
        return Err(Error::OutsideDomain {
            feature: i,
            value: z[i],
        });
    }
    Ok(z)
}

/// Whether the output moves with the sign of `score` at every probed offset.
fn sign_consistent<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    i: usize,
    score: f64,
    steps: &[f64],
    base: f64,
) -> Result<bool> {
    let sign = score.signum();
    for &delta in steps {
        let up = classifier.label_log_odds(&shifted(x, i, delta)?, label) - base;
        let down = classifier.label_log_odds(&shifted(x, i, -delta)?, label) - base;
        if sign * up <= -SLACK || sign * down >= SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that each nonzero score's sign matches the direction in which the
/// output moves within `eps` of the explained input.
pub fn qualitative_probe<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &AttributionScores,
    eps: f64,
    step_fractions: &[f64],
) -> Result<QualitativeVerdict> {
    let x = scores.input();
    let label = scores.label();
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    let steps = probe_steps(eps, step_fractions)?;
    let base = classifier.label_log_odds(x.values(), label);
    let statuses = scores
        .scores()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if s == 0.0 {
                Ok(FeatureStatus::ZeroScoreUntested)
            } else if sign_consistent(classifier, x, label, i, s, &steps, base)? {
                Ok(FeatureStatus::Consistent)
            } else {
                Ok(FeatureStatus::Violated)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QualitativeVerdict {
        statuses,
        epsilon_used: eps,
        probe_steps: steps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveVerdict {
    /// Verdict at the last radius tried.
    pub verdict: QualitativeVerdict,
    /// Features whose score magnitude exceeds the gate.
    pub gated: Vec<bool>,
    /// Every gated feature was consistent at some radius above the floor.
    pub found: bool,
}

/// Halves the probe radius from `eps0` until every feature with
/// `|score| > gate` is consistent, or the radius drops below `floor`.
///
/// Failing to find a radius is not proof of a local violation: it only
/// means none was found above the floor.
pub fn adaptive_probe<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &AttributionScores,
    eps0: f64,
    floor: f64,
    gate: f64,
    step_fractions: &[f64],
) -> Result<AdaptiveVerdict> {
    if !(floor > 0.0 && floor <= eps0) {
        return Err(Error::config(format!("need 0 < floor <= eps0, got {floor} and {eps0}")));
    }
    let gated: Vec<bool> = scores.scores().iter().map(|s| s.abs() > gate).collect();
    let mut eps = eps0;
    loop {
        let verdict = qualitative_probe(classifier, scores, eps, step_fractions)?;
        let ok = verdict
            .statuses
            .iter()
            .zip(&gated)
            .all(|(s, g)| !*g || *s == FeatureStatus::Consistent);
        if ok || eps / 2.0 < floor {
            return Ok(AdaptiveVerdict {
                verdict,
                gated,
                found: ok,
            });
        }
        eps /= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrongStatus {
    Consistent,
    Violated,
}

impl StrongStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StrongStatus::Consistent => "CONSISTENT",
            StrongStatus::Violated => "VIOLATED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongVerdict {
    pub statuses: Vec<StrongStatus>,
    pub tolerance: f64,
    pub epsilon_used: f64,
}

impl StrongVerdict {
    pub fn violations(&self) -> usize {
        self.statuses
            .iter()
            .filter(|s| **s == StrongStatus::Violated)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// The qualitative probe plus the zero-score case: a feature scored exactly
/// zero must not move `C_l` by more than `tolerance` at any probed offset.
pub fn strong_probe<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &AttributionScores,
    eps: f64,
    tolerance: f64,
    step_fractions: &[f64],
) -> Result<StrongVerdict> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::config(format!("tolerance must be positive, got {tolerance}")));
    }
    let q = qualitative_probe(classifier, scores, eps, step_fractions)?;
    let x = scores.input();
    let label = scores.label();
    let base = classifier.probability(x.values(), label);
    let mut statuses = Vec::with_capacity(q.statuses.len());
    for (i, status) in q.statuses.iter().enumerate() {
        let s = match status {
            FeatureStatus::Consistent => StrongStatus::Consistent,
            FeatureStatus::Violated => StrongStatus::Violated,
            FeatureStatus::ZeroScoreUntested => {
                let mut flat = true;
                for &delta in &q.probe_steps {
                    for d in [delta, -delta] {
                        let moved = classifier.probability(&shifted(x, i, d)?, label);
                        if (moved - base).abs() > tolerance {
                            flat = false;
                        }
                    }
                }
                if flat {
                    StrongStatus::Consistent
                } else {
                    StrongStatus::Violated
                }
            }
        };
        statuses.push(s);
    }
    Ok(StrongVerdict {
        statuses,
        tolerance,
        epsilon_used: eps,
    })
}

/// True when neither a positive nor a negative score for `feature` passes
/// the qualitative probe at radius `eps`.
pub fn both_signs_violated<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    feature: usize,
    eps: f64,
    step_fractions: &[f64],
) -> Result<bool> {
    if feature >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: feature,
            len: x.len(),
        });
    }
    let mut violated = true;
    for sign in [1.0, -1.0] {
        let mut s = vec![0.0; x.len()];
        s[feature] = sign;
        let scores = AttributionScores::new(s, label, x.clone())?;
        let v = qualitative_probe(classifier, &scores, eps, step_fractions)?;
        violated &= v.statuses[feature] == FeatureStatus::Violated;
    }
    Ok(violated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::gradient_scores;
    use crate::classifiers::{squared_logistic, LogisticRegressionModel};
    use crate::domain::{FeatureDomain, FeatureSchema, POSITIVE};
    use std::sync::Arc;

    fn point(v: Vec<f64>) -> Instance {
        Instance::from_values(v).unwrap()
    }

    #[test]
    fn logistic_gradients_are_consistent() {
        let m = LogisticRegressionModel::from_parameters(vec![2.0, -1.0], 0.3).unwrap();
        let s = gradient_scores(&m, &point(vec![0.7, -1.1]), POSITIVE, None).unwrap();
        let v = qualitative_probe(&m, &s, 0.1, &DEFAULT_STEP_FRACTIONS).unwrap();
        assert_eq!(v.statuses, vec![FeatureStatus::Consistent; 2]);
    }

    #[test]
    fn saturated_logistic_is_still_resolved() {
        // sigmoid(40) rounds to 1 in probability space, not in log-odds.
        let m = LogisticRegressionModel::from_parameters(vec![1.0], 40.0).unwrap();
        let s = AttributionScores::new(vec![1.0], POSITIVE, point(vec![0.0])).unwrap();
        assert!(qualitative_probe(&m, &s, 0.1, &DEFAULT_STEP_FRACTIONS).unwrap().passed());
    }

    #[test]
    fn flipped_scores_are_violated() {
        let m = LogisticRegressionModel::from_parameters(vec![2.0, -1.0, 0.0], 0.0).unwrap();
        let x = point(vec![0.1, 0.2, 0.3]);
        let g = gradient_scores(&m, &x, POSITIVE, None).unwrap();
        let flipped = g.with_scores(g.scores().iter().map(|v| -v).collect()).unwrap();
        let v = qualitative_probe(&m, &flipped, 0.1, &DEFAULT_STEP_FRACTIONS).unwrap();
        assert_eq!(
            v.statuses,
            vec![
                FeatureStatus::Violated,
                FeatureStatus::Violated,
                FeatureStatus::ZeroScoreUntested
            ]
        );
    }

    #[test]
    fn far_probe_crosses_the_minimum() {
        let c = squared_logistic();
        let eps = 0.2;
        let s = AttributionScores::new(vec![-1.0], POSITIVE, point(vec![-eps / 2.0])).unwrap();
        let near = qualitative_probe(&c, &s, eps, &[0.25]).unwrap();
        assert_eq!(near.statuses[0], FeatureStatus::Consistent);
        let far = qualitative_probe(&c, &s, eps, &[2.0]).unwrap();
        assert_eq!(far.statuses[0], FeatureStatus::Violated);
    }

    #[test]
    fn no_sign_works_globally() {
        let c = squared_logistic();
        assert!(both_signs_violated(&c, &point(vec![-0.5]), POSITIVE, 0, 2.0, &DEFAULT_STEP_FRACTIONS).unwrap());
        assert!(!both_signs_violated(&c, &point(vec![-0.5]), POSITIVE, 0, 0.1, &DEFAULT_STEP_FRACTIONS).unwrap());
    }

    #[test]
    fn strong_probe_zero_scores() {
        let m = LogisticRegressionModel::from_parameters(vec![2.0, 0.0], 0.0).unwrap();
        let s = gradient_scores(&m, &point(vec![0.4, 0.4]), POSITIVE, None).unwrap();
        let v = strong_probe(&m, &s, 0.1, 1e-12, &DEFAULT_STEP_FRACTIONS).unwrap();
        assert_eq!(v.statuses, vec![StrongStatus::Consistent; 2]);

        let c = squared_logistic();
        let s = gradient_scores(&c, &point(vec![0.0]), POSITIVE, None).unwrap();
        assert_eq!(s.scores(), &[0.0]);
        let v = strong_probe(&c, &s, 0.1, 1e-4, &DEFAULT_STEP_FRACTIONS).unwrap();
        assert_eq!(v.statuses, vec![StrongStatus::Violated]);

        let zeros = AttributionScores::new(vec![0.0, 0.0], POSITIVE, point(vec![0.0, 0.0])).unwrap();
        assert!(!strong_probe(&m, &zeros, 0.1, 1e-6, &DEFAULT_STEP_FRACTIONS).unwrap().passed());
    }

    #[test]
    fn adaptive_radius_shrinks_near_the_minimum() {
        let c = squared_logistic();
        let s = gradient_scores(&c, &point(vec![-0.01]), POSITIVE, None).unwrap();
        assert!(!qualitative_probe(&c, &s, 0.1, &DEFAULT_STEP_FRACTIONS).unwrap().passed());
        let a = adaptive_probe(&c, &s, 0.1, 1e-7, 1e-4, &DEFAULT_STEP_FRACTIONS).unwrap();
        assert!(a.found);
        assert!(a.verdict.epsilon_used < 0.02);
    }

    #[test]
    fn probe_outside_domain_is_an_error() {
        let schema = Arc::new(
            FeatureSchema::new(vec!["a".into()], vec![FeatureDomain::new(0.0, 1.0).unwrap()]).unwrap(),
        );
        let x = Instance::new(vec![0.95], schema).unwrap();
        let m = LogisticRegressionModel::from_parameters(vec![1.0], 0.0).unwrap();
        let s = AttributionScores::new(vec![1.0], POSITIVE, x).unwrap();
        assert!(matches!(
            qualitative_probe(&m, &s, 0.1, &DEFAULT_STEP_FRACTIONS),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
