pub mod attribution;
pub mod cli;
pub mod classifiers;
pub mod domain;
pub mod error;
pub mod eval;
pub mod faithfulness;
pub mod ingest;
pub mod pipeline;
mod persist;
pub mod regression;
mod table;

pub use domain::{
    predict, replace_feature, AttributionScores, ClassificationProblem, Classifier, FeatureDomain,
    FeatureSchema, Instance, ProbabilityVector, NEGATIVE, POSITIVE,
};
pub use error::{Error, Result};
