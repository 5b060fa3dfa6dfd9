//! Rank agreement of every attribution method with the reference scores:
//! the weights for logistic regression, the gradient for the MLP.
//!
//! Reads every bundled dataset under `data/`; pass paths to use others.
//!
//!     cargo run --release --example fidelity_table [a.csv b.csv ...]

use std::path::{Path, PathBuf};

use faithful::attribution::{ExplainerSuite, Method};
use faithful::classifiers::Activation;
use faithful::eval::{fidelity_vs_reference, FidelityRow, FidelityTable};
use faithful::ingest::{load_csv, LabelColumn};
use faithful::pipeline::{train, TrainOptions};
use faithful::{Instance, POSITIVE};

fn datasets() -> Vec<PathBuf> {
    let given: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if !given.is_empty() {
        return given;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    ["pima", "bknt", "wdbc"]
        .iter()
        .map(|n| dir.join(format!("{n}.csv")))
        .filter(|p| p.exists())
        .collect()
}

fn main() -> faithful::Result<()> {
    let mut lr_table = FidelityTable::default();
    let mut mlp_table = FidelityTable::default();
    for path in datasets() {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let problem = load_csv(&path, &LabelColumn::Last)?;
        for (opts, table) in [
            (TrainOptions::logistic(), &mut lr_table),
            (TrainOptions::mlp(Activation::Relu), &mut mlp_table),
        ] {
            let trained = train(&problem, &opts)?;
            let model = trained.model();
            let xs: Vec<Instance> = trained.split.test.instances().collect();
            let suite = ExplainerSuite::new(model, &trained.split.train, POSITIVE, &Method::ALL, 42)?;
            let reference: Vec<Vec<f64>> = match model.as_logistic() {
                Some(lr) => vec![lr.weights().to_vec(); xs.len()],
                None => suite
                    .explain_all(model, Method::Grad, &xs)?
                    .iter()
                    .map(|s| s.scores().to_vec())
                    .collect(),
            };
            for method in Method::ALL {
                let scores: Vec<Vec<f64>> = suite
                    .explain_all(model, method, &xs)?
                    .iter()
                    .map(|s| s.scores().to_vec())
                    .collect();
                let f = fidelity_vs_reference(&reference, &scores)?;
                table.push(FidelityRow {
                    dataset: name.clone(),
                    method,
                    mean_rho: f.mean_rho,
                    instances: f.instances,
                    excluded: f.excluded,
                });
            }
        }
    }
    println!("Logistic regression, against the weights\n\n{}", lr_table.to_markdown());
    println!("MLP, against the gradient\n\n{}", mlp_table.to_markdown());
    Ok(())
}
