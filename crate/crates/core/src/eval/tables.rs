use std::collections::BTreeSet;

use crate::attribution::Method;
use crate::table::{csv_field, markdown};

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityRow {
    pub dataset: String,
    pub method: Method,
    pub mean_rho: f64,
    pub instances: usize,
    pub excluded: usize,
}

/// Mean rank correlation per dataset and method.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FidelityTable {
    pub rows: Vec<FidelityRow>,
}

impl FidelityTable {
    pub fn push(&mut self, row: FidelityRow) {
        self.rows.push(row);
    }

    pub fn get(&self, dataset: &str, method: Method) -> Option<&FidelityRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.method == method)
    }

    /// Long format, one line per (dataset, method).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,method,mean_rho,instances,excluded\n");
        for r in self.sorted() {
            out.push_str(&format!(
                "{},{},{:.6},{},{}\n",
                csv_field(&r.dataset),
                r.method.heading(),
                r.mean_rho,
                r.instances,
                r.excluded
            ));
        }
        out
    }

    /// One row per dataset, one column per method.
    pub fn to_markdown(&self) -> String {
        let methods = methods_of(self.rows.iter().map(|r| r.method));
        let mut head = vec!["Dataset".to_string()];
        head.extend(methods.iter().map(|m| m.heading().to_string()));
        let rows: Vec<Vec<String>> = datasets_of(self.rows.iter().map(|r| r.dataset.as_str()))
            .into_iter()
            .map(|d| {
                let mut cells = vec![d.clone()];
                cells.extend(methods.iter().map(|m| match self.get(&d, *m) {
                    Some(r) => format!("{:.3}", r.mean_rho),
                    None => "-".into(),
                }));
                cells
            })
            .collect();
        markdown(&head, &rows)
    }

    fn sorted(&self) -> Vec<&FidelityRow> {
        let datasets = datasets_of(self.rows.iter().map(|r| r.dataset.as_str()));
        let mut rows: Vec<&FidelityRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| (datasets.iter().position(|d| *d == r.dataset), r.method));
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRow {
    pub classifier: String,
    pub dataset: String,
    pub method: Method,
    pub mean_ms: f64,
}

/// Mean milliseconds per explanation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuntimeTable {
    pub rows: Vec<RuntimeRow>,
}

impl RuntimeTable {
    pub fn push(&mut self, row: RuntimeRow) {
        self.rows.push(row);
    }

    pub fn get(&self, classifier: &str, dataset: &str, method: Method) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.dataset == dataset && r.method == method)
            .map(|r| r.mean_ms)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("classifier,dataset,method,mean_ms\n");
        let mut rows: Vec<&RuntimeRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (&a.classifier, &a.dataset, a.method).cmp(&(&b.classifier, &b.dataset, b.method))
        });
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{:.4}\n",
                csv_field(&r.classifier),
                csv_field(&r.dataset),
                r.method.heading(),
                r.mean_ms
            ));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let methods = methods_of(self.rows.iter().map(|r| r.method));
        let mut head = vec!["Classifier".to_string(), "Dataset".to_string()];
        head.extend(methods.iter().map(|m| m.heading().to_string()));
        let mut keys: Vec<(String, String)> = Vec::new();
        for r in &self.rows {
            let key = (r.classifier.clone(), r.dataset.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows: Vec<Vec<String>> = keys
            .into_iter()
            .map(|(c, d)| {
                let mut cells = vec![c.clone(), d.clone()];
                cells.extend(methods.iter().map(|m| match self.get(&c, &d, *m) {
                    Some(ms) => format!("{ms:.2}"),
                    None => "-".into(),
                }));
                cells
            })
            .collect();
        markdown(&head, &rows)
    }
}

fn methods_of(it: impl Iterator<Item = Method>) -> Vec<Method> {
    it.collect::<BTreeSet<_>>().into_iter().collect()
}

/// Datasets in first-seen order.
fn datasets_of<'a>(it: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for d in it {
        if !out.iter().any(|o| o == d) {
            out.push(d.to_string());
        }
    }
    out
}
