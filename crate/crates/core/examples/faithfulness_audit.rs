//! Qualitative and strong probes on a monotone model and on scores that
//! disagree with it.
//!
//!     cargo run --release --example faithfulness_audit

use faithful::attribution::gradient_scores;
use faithful::classifiers::LogisticRegressionModel;
use faithful::faithfulness::{qualitative_probe, strong_probe, DEFAULT_STEP_FRACTIONS};
use faithful::{Instance, POSITIVE};

fn main() -> faithful::Result<()> {
    // The third feature carries no weight, so a zero score for it is right.
    let model = LogisticRegressionModel::from_parameters(vec![1.5, -0.7, 0.0, 0.2], -0.3)?;
    let x = Instance::from_values(vec![0.4, -1.2, 0.9, 2.0])?;
    let grad = gradient_scores(&model, &x, POSITIVE, None)?;

    let flipped = grad.with_scores(grad.scores().iter().map(|s| -s).collect())?;
    let dropped = grad.with_scores(vec![grad.scores()[0], 0.0, 0.0, grad.scores()[3]])?;

    for (name, scores) in [("gradient", &grad), ("sign-flipped", &flipped), ("feature 1 zeroed", &dropped)] {
        let q = qualitative_probe(&model, scores, 3.0, &DEFAULT_STEP_FRACTIONS)?;
        let s = strong_probe(&model, scores, 3.0, 1e-4, &DEFAULT_STEP_FRACTIONS)?;
        let q: Vec<&str> = q.statuses.iter().map(|v| v.as_str()).collect();
        let s: Vec<&str> = s.statuses.iter().map(|v| v.as_str()).collect();
        println!("{name}\n  qualitative {q:?}\n  strong      {s:?}");
    }
    Ok(())
}
