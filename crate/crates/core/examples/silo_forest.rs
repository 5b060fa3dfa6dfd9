//! SILO: a random forest fitted to the classifier's own outputs decides
//! which training points are neighbours of the query, and a weighted ridge
//! regression over those neighbours gives the scores.
//!
//!     cargo run --release --example silo_forest

use faithful::attribution::{silo_scores, SiloConfig, SiloExplainer};
use faithful::eval::spearman_rho;
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::POSITIVE;

fn main() -> faithful::Result<()> {
    let problem = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pima.csv"),
        &LabelColumn::Last,
    )?;
    let trained = train(&problem, &TrainOptions::logistic())?;
    let model = trained.model();
    let weights = model.as_logistic().expect("logistic model").weights();

    let silo = SiloExplainer::fit(model, trained.split.train.features(), POSITIVE, &SiloConfig::default())?;
    let forest = silo.forest();
    let leaves: usize = forest.trees().iter().map(|t| t.num_leaves()).sum();
    let depth = forest.trees().iter().map(|t| t.depth()).max().unwrap_or(0);
    println!(
        "{} trees over {} training rows: {:.1} leaves per tree, max depth {depth}",
        forest.trees().len(),
        forest.num_samples(),
        leaves as f64 / forest.trees().len() as f64
    );

    let x = trained.split.test.instance(0)?;
    let w = silo.weights(x.values())?;
    let used = w.iter().filter(|v| **v > 0.0).count();
    println!("query 0 shares a leaf with {used} training rows");

    let scores = silo_scores(model, &x, POSITIVE, &silo)?;
    for (name, (s, wt)) in problem.feature_names().iter().zip(scores.scores().iter().zip(weights)) {
        println!("{name:<6} silo {s:>8.4}   weight {wt:>8.4}");
    }
    println!("rank correlation: {:.3}", spearman_rho(weights, scores.scores())?);
    Ok(())
}
