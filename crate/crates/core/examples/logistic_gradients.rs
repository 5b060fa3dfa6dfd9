//! Gradient scores of a logistic regression are its weights scaled by
//! `p (1 - p)`, so they rank features exactly as the weights do.
//!
//!     cargo run --release --example logistic_gradients [path/to/data.csv]

use faithful::attribution::gradient_scores;
use faithful::eval::spearman_rho;
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::{Classifier, POSITIVE};

fn main() -> faithful::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pima.csv").into());
    let problem = load_csv(&path, &LabelColumn::Last)?;
    let trained = train(&problem, &TrainOptions::logistic())?;
    let lr = trained.model().as_logistic().expect("logistic model");
    println!(
        "test accuracy {:.3}, F1 {:.3}",
        trained.test_metrics.accuracy, trained.test_metrics.f1
    );

    let x = trained.split.test.instance(0)?;
    let grad = gradient_scores(trained.model(), &x, POSITIVE, None)?;
    let p = trained.model().probability(x.values(), POSITIVE);
    println!("\nfirst test instance, p = {p:.4}, p(1-p) = {:.4}", p * (1.0 - p));
    println!("{:<8} {:>9} {:>9} {:>9}", "feature", "weight", "grad", "ratio");
    for ((name, w), g) in problem.feature_names().iter().zip(lr.weights()).zip(grad.scores()) {
        println!("{name:<8} {w:>9.4} {g:>9.4} {:>9.6}", g / w);
    }

    let mut worst = f64::INFINITY;
    for x in trained.split.test.instances() {
        let g = gradient_scores(trained.model(), &x, POSITIVE, None)?;
        worst = worst.min(spearman_rho(lr.weights(), g.scores())?);
    }
    println!("\nlowest rank correlation with the weights over the test split: {worst}");
    Ok(())
}
