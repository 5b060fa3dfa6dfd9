//! Scores of all four methods for the first test instance, one row per
//! feature, ordered by logistic-regression weight.
//!
//!     cargo run --release --example score_table [path/to/data.csv]

use faithful::attribution::{ExplainerSuite, Method, ScoreTable};
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::POSITIVE;

fn main() -> faithful::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pima.csv").into());
    let problem = load_csv(&path, &LabelColumn::Last)?;
    let trained = train(&problem, &TrainOptions::logistic())?;
    let model = trained.model();
    let suite = ExplainerSuite::new(model, &trained.split.train, POSITIVE, &Method::ALL, 42)?;

    let x = trained.split.test.instance(0)?;
    let mut columns = Vec::new();
    for method in Method::ALL {
        columns.push((method, suite.explain(model, method, &x, 0)?.scores().to_vec()));
    }
    let weights = model.as_logistic().map(|m| m.weights().to_vec());
    let table = ScoreTable::new(problem.feature_names().to_vec(), weights, columns)?;
    println!("{}", table.to_markdown());
    Ok(())
}
