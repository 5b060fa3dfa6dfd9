//! Dataset loading, train/test splitting, standardization and problem
//! persistence.
//!
//! Input files are RFC-4180 CSV with a header row and `.` as the decimal
//! separator. Every non-label cell must parse as a finite decimal; empty
//! cells and `?` are rejected rather than imputed.

mod split;

pub use split::{split_and_standardize, Split, SplitSpec, StandardizationStats};

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{ClassificationProblem, FeatureDomain, FeatureSchema};
use crate::error::{Error, Result};
use crate::persist::{self, F17};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Named(String),
}

impl LabelColumn {
    pub fn from_option(name: Option<&str>) -> Self {
        match name {
            Some(n) => LabelColumn::Named(n.to_string()),
            None => LabelColumn::Last,
        }
    }
}

/// Reads a binary classification problem from a CSV file.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<ClassificationProblem> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::data(format!("cannot open dataset '{}': {e}", path.display()))
    })?;
    parse_csv(file, label)
}

/// Parses CSV text. Labels `0`/`1` map to the negative/positive class;
/// any other pair of distinct values is ordered lexicographically.
pub fn parse_csv<R: Read>(reader: R, label: &LabelColumn) -> Result<ClassificationProblem> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(Error::data("need at least one feature column and a label column"));
    }
    let label_idx = match label {
        LabelColumn::Last => headers.len() - 1,
        LabelColumn::Named(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("label column '{name}' not found")))?,
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // row numbers are 1-based data rows, the header is row 0
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: record.len(),
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(names.len());
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                if cell.is_empty() || cell == "?" {
                    return Err(Error::Parse {
                        row,
                        column: c,
                        message: "missing label".into(),
                    });
                }
                raw_labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() || cell == "?" {
                return Err(Error::Parse {
                    row,
                    column: c,
                    message: "missing value".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: c,
                message: format!("'{cell}' is not a decimal number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: c,
                    message: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        features.push(values);
    }
    if features.is_empty() {
        return Err(Error::data("no data rows"));
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    let labels: Vec<String> = if distinct.len() == 2 && distinct.contains("0") && distinct.contains("1") {
        vec!["0".into(), "1".into()]
    } else {
        distinct.iter().map(|s| s.to_string()).collect()
    };
    if labels.len() != 2 {
        return Err(Error::data(format!(
            "label column must be binary, found {} distinct values",
            labels.len()
        )));
    }
    let targets = raw_labels
        .iter()
        .map(|l| usize::from(l == &labels[1]))
        .collect();
    let schema = Arc::new(FeatureSchema::unbounded(names)?);
    ClassificationProblem::new(schema, labels, features, targets)
}

#[derive(Serialize, Deserialize)]
struct DomainDoc {
    lower: Option<F17>,
    upper: Option<F17>,
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    format: String,
    version: u32,
    feature_names: Vec<String>,
    domains: Vec<DomainDoc>,
    labels: Vec<String>,
    targets: Vec<usize>,
    features: Vec<Vec<F17>>,
}

const PROBLEM_FORMAT: &str = "faithful-problem";

fn bound(v: f64) -> Option<F17> {
    v.is_finite().then_some(F17(v))
}

/// Serializes a problem as a self-describing JSON document.
pub fn problem_to_json(problem: &ClassificationProblem) -> Result<String> {
    let doc = ProblemDoc {
        format: PROBLEM_FORMAT.into(),
        version: 1,
        feature_names: problem.feature_names().to_vec(),
        domains: problem
            .schema()
            .domains()
            .iter()
            .map(|d| DomainDoc {
                lower: bound(d.lower()),
                upper: bound(d.upper()),
            })
            .collect(),
        labels: problem.labels().to_vec(),
        targets: problem.targets().to_vec(),
        features: problem.features().iter().map(|r| persist::wrap(r)).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn problem_from_json(text: &str) -> Result<ClassificationProblem> {
    let doc: ProblemDoc = serde_json::from_str(text)?;
    if doc.format != PROBLEM_FORMAT {
        return Err(Error::data(format!("not a problem document: format '{}'", doc.format)));
    }
    let domains = doc
        .domains
        .into_iter()
        .map(|d| {
            FeatureDomain::new(
                d.lower.map_or(f64::NEG_INFINITY, |v| v.0),
                d.upper.map_or(f64::INFINITY, |v| v.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let schema = Arc::new(FeatureSchema::new(doc.feature_names, domains)?);
    let features = doc.features.into_iter().map(persist::unwrap).collect();
    ClassificationProblem::new(schema, doc.labels, features, doc.targets)
}

pub fn save_problem(problem: &ClassificationProblem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, problem_to_json(problem)?)?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ClassificationProblem> {
    problem_from_json(&std::fs::read_to_string(path)?)
}
