//! Milliseconds per explanation for each method on the WDBC MLP, timed on
//! one thread.
//!
//!     cargo run --release --example runtime_bench

use faithful::attribution::{ExplainerSuite, Method};
use faithful::classifiers::Activation;
use faithful::eval::{runtime_bench, RuntimeRow, RuntimeTable};
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::{Instance, POSITIVE};

fn main() -> faithful::Result<()> {
    let problem = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/wdbc.csv"),
        &LabelColumn::Last,
    )?;
    let trained = train(&problem, &TrainOptions::mlp(Activation::Relu))?;
    let model = trained.model();
    let suite = ExplainerSuite::new(model, &trained.split.train, POSITIVE, &Method::ALL, 42)?;
    println!("SHAP mode for {} features: {:?}", problem.num_features(), suite.shap_mode().unwrap());

    let xs: Vec<Instance> = trained.split.test.instances().take(10).collect();
    let mut table = RuntimeTable::default();
    for method in Method::ALL {
        let mean_ms = runtime_bench(&xs, 3, |i, x| suite.explain(model, method, x, i).map(drop))?;
        table.push(RuntimeRow {
            classifier: "mlp".into(),
            dataset: "wdbc".into(),
            method,
            mean_ms,
        });
    }
    println!("\n{}", table.to_markdown());
    Ok(())
}
