//! Self-describing JSON model documents.
//!
//! Parameters are written with 17 significant digits and read back
//! bit-exactly, so a reloaded model reproduces predictions exactly. The
//! document also carries what is needed to rebuild the inputs the model was
//! trained on: feature names, standardization statistics and the split.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::ingest::{SplitSpec, StandardizationStats};
use crate::persist::{self, F17};

use super::{Activation, DenseLayer, LogisticRegressionModel, MlpModel, Model};

const MODEL_FORMAT: &str = "faithful-model";
const VERSION: u32 = 1;

/// A trained model plus the preprocessing context it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub feature_names: Vec<String>,
    pub standardization: Option<StandardizationStats>,
    pub split: Option<SplitSpec>,
    /// Label column of the source CSV; `None` means the last column.
    pub label_column: Option<String>,
}

impl ModelFile {
    pub fn new(model: Model, feature_names: Vec<String>) -> Self {
        Self {
            model,
            feature_names,
            standardization: None,
            split: None,
            label_column: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        use crate::domain::Classifier;
        check_len(self.model.num_features(), self.feature_names.len())?;
        let (labels, params) = match &self.model {
            Model::Logistic(m) => (
                m.labels().clone(),
                ParamsDoc::LogisticRegression {
                    weights: persist::wrap(m.weights()),
                    bias: F17(m.bias()),
                },
            ),
            Model::Mlp(m) => (
                m.labels().clone(),
                ParamsDoc::Mlp {
                    activation: m.activation(),
                    layers: m
                        .layers()
                        .iter()
                        .map(|l| LayerDoc {
                            inputs: l.inputs(),
                            outputs: l.outputs(),
                            weights: persist::wrap(l.weights()),
                            bias: persist::wrap(l.bias()),
                        })
                        .collect(),
                },
            ),
        };
        let doc = ModelDoc {
            format: MODEL_FORMAT.into(),
            version: VERSION,
            feature_names: self.feature_names.clone(),
            labels: labels.to_vec(),
            params,
            standardization: self.standardization.as_ref().map(|s| StatsDoc {
                means: persist::wrap(&s.means),
                stds: persist::wrap(&s.stds),
            }),
            split: self.split,
            label_column: self.label_column.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::data(format!("not a model document: format '{}'", doc.format)));
        }
        if doc.version != VERSION {
            return Err(Error::data(format!("unsupported model version {}", doc.version)));
        }
        let labels: [String; 2] = doc
            .labels
            .try_into()
            .map_err(|_| Error::data("a model document needs exactly two labels"))?;
        let model = match doc.params {
            ParamsDoc::LogisticRegression { weights, bias } => {
                Model::Logistic(LogisticRegressionModel::new(persist::unwrap(weights), bias.0, labels)?)
            }
            ParamsDoc::Mlp { activation, layers } => {
                let layers = layers
                    .into_iter()
                    .map(|l| {
                        DenseLayer::new(
                            l.inputs,
                            l.outputs,
                            persist::unwrap(l.weights),
                            persist::unwrap(l.bias),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Model::Mlp(MlpModel::new(layers, activation, labels)?)
            }
        };
        let standardization = doc
            .standardization
            .map(|s| StandardizationStats::new(persist::unwrap(s.means), persist::unwrap(s.stds)))
            .transpose()?;
        let file = Self {
            model,
            feature_names: doc.feature_names,
            standardization,
            split: doc.split,
            label_column: doc.label_column,
        };
        {
            use crate::domain::Classifier;
            check_len(file.model.num_features(), file.feature_names.len())?;
        }
        if let Some(s) = &file.standardization {
            check_len(file.feature_names.len(), s.len())?;
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::data(format!("cannot read model '{}': {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    feature_names: Vec<String>,
    labels: Vec<String>,
    params: ParamsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standardization: Option<StatsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_column: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ParamsDoc {
    LogisticRegression { weights: Vec<F17>, bias: F17 },
    Mlp { activation: Activation, layers: Vec<LayerDoc> },
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    inputs: usize,
    outputs: usize,
    weights: Vec<F17>,
    bias: Vec<F17>,
}

#[derive(Serialize, Deserialize)]
struct StatsDoc {
    means: Vec<F17>,
    stds: Vec<F17>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Classifier;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn logistic_round_trip_is_bit_exact() {
        let lr = LogisticRegressionModel::from_parameters(vec![0.1, -1.0 / 3.0, 2e-310], 0.7).unwrap();
        let mut file = ModelFile::new(Model::Logistic(lr), names(3));
        file.standardization =
            Some(StandardizationStats::new(vec![1.0 / 7.0, 2.0, -3.0], vec![0.3, 1.0, 9.5]).unwrap());
        file.split = Some(SplitSpec::default());
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn mlp_round_trip_preserves_predictions() {
        let m = MlpModel::random(4, &[8, 8], Activation::Tanh, 3).unwrap();
        let file = ModelFile::new(Model::Mlp(m), names(4));
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        let x = [0.3, -1.2, 2.5, 0.01];
        assert_eq!(
            back.model.log_odds(&x).to_bits(),
            file.model.log_odds(&x).to_bits()
        );
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(ModelFile::from_json(r#"{"format":"other","version":1}"#).is_err());
        assert!(ModelFile::from_json("not json").is_err());
    }

    #[test]
    fn rejects_mismatched_feature_names() {
        let lr = LogisticRegressionModel::from_parameters(vec![1.0, 2.0], 0.0).unwrap();
        let file = ModelFile::new(Model::Logistic(lr), names(3));
        assert!(file.to_json().is_err());
    }
}
