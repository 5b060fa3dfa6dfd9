//! LIME on a known linear model, then on a trained MLP.
//!
//!     cargo run --release --example lime_surrogate

use faithful::attribution::{gradient_scores, lime_fit, lime_scores, LimeConfig};
use faithful::classifiers::Activation;
use faithful::eval::spearman_rho;
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::POSITIVE;

fn main() -> faithful::Result<()> {
    // An exactly linear target: the surrogate recovers the coefficients.
    let cfg = LimeConfig {
        num_samples: 10_000,
        l2_strength: 1e-9,
        ..LimeConfig::default()
    };
    let coef = lime_fit(|z| 0.5 + 2.0 * z[0] - z[1] + 0.25 * z[2], &[0.3, -1.0, 2.0], &cfg)?;
    println!("surrogate of 2a - b + c/4: {coef:.4?}");

    let problem = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pima.csv"),
        &LabelColumn::Last,
    )?;
    let trained = train(&problem, &TrainOptions::mlp(Activation::Relu))?;
    let model = trained.model();
    println!("\nMLP on pima, test accuracy {:.3}", trained.test_metrics.accuracy);
    for (i, x) in trained.split.test.instances().take(5).enumerate() {
        let cfg = LimeConfig {
            seed: i as u64,
            ..LimeConfig::default()
        };
        let lime = lime_scores(model, &x, POSITIVE, &cfg)?;
        let grad = gradient_scores(model, &x, POSITIVE, None)?;
        println!(
            "instance {i}: rank correlation with the gradient {:.3}",
            spearman_rho(grad.scores(), lime.scores())?
        );
    }
    Ok(())
}
