//! Load, split, standardize, train and score in one call, and rebuild the
//! same split later from a saved model.

use serde::{Deserialize, Serialize};

use crate::classifiers::io::ModelFile;
use crate::classifiers::{
    train_logistic_regression, train_mlp, Activation, Model, TrainConfig, TrainSummary,
};
use crate::domain::{ClassificationProblem, Classifier, POSITIVE};
use crate::error::{Error, Result};
use crate::ingest::{split_and_standardize, Split, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Lr,
    Mlp,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lr" | "logistic" | "logistic_regression" => Ok(ModelKind::Lr),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::config(format!("unknown classifier kind '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub kind: ModelKind,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub train: TrainConfig,
    pub split: SplitSpec,
}

impl TrainOptions {
    /// Logistic regression with 500 iterations.
    pub fn logistic() -> Self {
        Self {
            kind: ModelKind::Lr,
            hidden: Vec::new(),
            activation: Activation::Relu,
            train: TrainConfig::logistic_default(),
            split: SplitSpec::default(),
        }
    }

    /// Five hidden layers of eight units, up to 1000 epochs.
    pub fn mlp(activation: Activation) -> Self {
        Self {
            kind: ModelKind::Mlp,
            hidden: vec![8; 5],
            activation,
            train: TrainConfig::mlp_default(),
            split: SplitSpec::default(),
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Lr => Self::logistic(),
            ModelKind::Mlp => Self::mlp(Activation::Relu),
        }
    }
}

/// Accuracy and positive-class F1 on a labelled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
}

pub fn evaluate<C: Classifier + ?Sized>(classifier: &C, problem: &ClassificationProblem) -> Metrics {
    let (mut tp, mut fp, mut fneg, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (x, &t) in problem.features().iter().zip(problem.targets()) {
        let predicted = usize::from(classifier.log_odds(x) > 0.0);
        correct += usize::from(predicted == t);
        match (predicted == POSITIVE, t == POSITIVE) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    };
    Metrics {
        accuracy: correct as f64 / problem.len().max(1) as f64,
        f1,
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub file: ModelFile,
    pub split: Split,
    pub summary: TrainSummary,
    pub test_metrics: Metrics,
}

impl Trained {
    pub fn model(&self) -> &Model {
        &self.file.model
    }
}

/// Splits `problem`, standardizes on the train split and trains.
pub fn train(problem: &ClassificationProblem, opts: &TrainOptions) -> Result<Trained> {
    let split = split_and_standardize(problem, &opts.split)?;
    let (model, summary) = match opts.kind {
        ModelKind::Lr => {
            let (m, s) = train_logistic_regression(&split.train, &opts.train)?;
            (Model::Logistic(m), s)
        }
        ModelKind::Mlp => {
            let (m, s) = train_mlp(&split.train, &opts.hidden, opts.activation, &opts.train)?;
            (Model::Mlp(m), s)
        }
    };
    if !summary.final_loss.is_finite() {
        return Err(Error::Numerical("training loss is not finite".into()));
    }
    let test_metrics = evaluate(&model, &split.test);
    let mut file = ModelFile::new(model, problem.feature_names().to_vec());
    file.standardization = Some(split.stats.clone());
    file.split = Some(opts.split);
    Ok(Trained {
        file,
        split,
        summary,
        test_metrics,
    })
}

/// Recreates the standardized split a saved model was trained on.
pub fn rebuild_split(file: &ModelFile, problem: &ClassificationProblem) -> Result<Split> {
    if problem.feature_names() != file.feature_names.as_slice() {
        return Err(Error::data("dataset columns do not match the model's feature names"));
    }
    let spec = file.split.unwrap_or_default();
    let split = split_and_standardize(problem, &spec)?;
    if let Some(stats) = &file.standardization {
        if stats != &split.stats {
            return Err(Error::data(
                "dataset does not reproduce the model's standardization statistics",
            ));
        }
    }
    Ok(split)
}
