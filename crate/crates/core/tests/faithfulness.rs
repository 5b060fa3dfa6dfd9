mod common;

use faithful::attribution::{gradient_scores, ExplainerSuite, Method};
use faithful::classifiers::LogisticRegressionModel;
use faithful::faithfulness::{
    error_decay, error_dominance, qualitative_probe, sign_agreement, strong_probe, FeatureStatus,
    StrongStatus, DEFAULT_STEP_FRACTIONS,
};
use faithful::pipeline::{train, TrainOptions};
use faithful::{Instance, POSITIVE};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // A logistic regression is monotone in every feature, so its gradient
    // is faithful at any radius and the flipped gradient never is.
    #[test]
    fn monotone_models_and_their_gradients(
        w in prop::collection::vec(-2.0..2.0f64, 1..6),
        x in prop::collection::vec(-2.0..2.0f64, 6),
        eps in 0.01..5.0f64,
    ) {
        let k = w.len();
        let model = LogisticRegressionModel::from_parameters(w.clone(), 0.3).unwrap();
        let x = Instance::from_values(x[..k].to_vec()).unwrap();
        let g = gradient_scores(&model, &x, POSITIVE, None).unwrap();
        let v = qualitative_probe(&model, &g, eps, &DEFAULT_STEP_FRACTIONS).unwrap();
        prop_assert!(v.passed());
        let flipped = g.with_scores(g.scores().iter().map(|s| -s).collect()).unwrap();
        let v = qualitative_probe(&model, &flipped, eps, &DEFAULT_STEP_FRACTIONS).unwrap();
        for (status, w) in v.statuses.iter().zip(&w) {
            if w.abs() > 1e-4 {
                prop_assert_eq!(*status, FeatureStatus::Violated);
            }
        }
    }
}

#[test]
fn zero_score_needs_a_flat_feature() {
    let model = LogisticRegressionModel::from_parameters(vec![1.0, 0.0, -0.5], 0.0).unwrap();
    let x = Instance::from_values(vec![0.2, 0.4, -0.1]).unwrap();
    let g = gradient_scores(&model, &x, POSITIVE, None).unwrap();
    let v = strong_probe(&model, &g, 1.0, 1e-6, &DEFAULT_STEP_FRACTIONS).unwrap();
    assert!(v.passed());
    let hide = g.with_scores(vec![0.0, 0.0, g.scores()[2]]).unwrap();
    let v = strong_probe(&model, &hide, 1.0, 1e-6, &DEFAULT_STEP_FRACTIONS).unwrap();
    assert_eq!(v.statuses[0], StrongStatus::Violated);
    assert_eq!(v.statuses[1], StrongStatus::Consistent);
}

#[test]
fn lime_errors_are_dominated_by_gradient_errors() {
    let problem = common::load("pima").unwrap();
    let trained = train(&problem, &TrainOptions::logistic()).unwrap();
    let model = trained.model();
    let suite = ExplainerSuite::new(model, &trained.split.train, POSITIVE, &[Method::Lime], 42).unwrap();
    for i in 0..5 {
        let x = trained.split.test.instance(i).unwrap();
        let g = gradient_scores(model, &x, POSITIVE, None).unwrap();
        let l = suite.explain(model, Method::Lime, &x, i).unwrap();
        let gap: Vec<f64> = l.scores().iter().zip(g.scores()).map(|(a, b)| a - b).collect();
        let d = error_dominance(model, g.scores(), l.scores(), &x, POSITIVE, &gap, 0.5, 14).unwrap();
        assert!(d.passed, "{:?}", d.ratios);
        let decay = error_decay(model, g.scores(), &x, POSITIVE, &gap, 0.5, 12).unwrap();
        assert!(decay.passed);
        let agree = sign_agreement(g.scores(), l.scores()).unwrap();
        assert_eq!(agree.fraction, 1.0);
    }
}
