#![allow(dead_code)]

use std::path::PathBuf;

use faithful::ingest::{load_csv, LabelColumn};
use faithful::ClassificationProblem;

/// Dataset names in table order.
pub const DATASETS: [&str; 3] = ["pima", "bknt", "wdbc"];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.csv"))
}

/// The dataset if its file is present.
pub fn load(name: &str) -> Option<ClassificationProblem> {
    let path = data_path(name);
    path.exists()
        .then(|| load_csv(&path, &LabelColumn::Last).expect("bundled dataset parses"))
}
