//! A non-monotone classifier that no single score can describe globally.
//!
//! `C(x) = sigmoid(x^2)` falls on the negative half-line and rises on the
//! positive one. At `x = -0.5` the gradient is negative, and it is locally
//! faithful, but once the probe radius reaches across zero both a positive
//! and a negative score are contradicted somewhere.
//!
//!     cargo run --example nonmonotone_witness

use faithful::attribution::gradient_scores;
use faithful::classifiers::squared_logistic;
use faithful::faithfulness::{both_signs_violated, qualitative_probe, DEFAULT_STEP_FRACTIONS};
use faithful::{Classifier, Instance, POSITIVE};

fn main() -> faithful::Result<()> {
    let c = squared_logistic();
    for v in [-0.5, 0.0, 1.0] {
        println!("C({v:>4}) = {:.4}", c.probability(&[v], POSITIVE));
    }

    let x = Instance::from_values(vec![-0.5])?;
    let grad = gradient_scores(&c, &x, POSITIVE, None)?;
    println!("\ngradient at -0.5: {:.4}", grad.scores()[0]);

    for eps in [0.25, 2.0] {
        let local = qualitative_probe(&c, &grad, eps, &DEFAULT_STEP_FRACTIONS)?;
        let neither = both_signs_violated(&c, &x, POSITIVE, 0, eps, &DEFAULT_STEP_FRACTIONS)?;
        println!(
            "eps = {eps}: gradient {}, every sign violated: {neither}",
            local.statuses[0].as_str()
        );
    }
    Ok(())
}
