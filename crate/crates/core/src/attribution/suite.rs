use rayon::prelude::*;

use super::lime::{lime_scores, LimeConfig};
use super::shap::{kernel_shap_scores, sample_background, ShapConfig, ShapMode};
use super::silo::{silo_scores, SiloConfig, SiloExplainer};
use super::{gradient_scores, Method};
use crate::domain::{AttributionScores, ClassificationProblem, Classifier, Instance};
use crate::error::{check_len, Error, Result};
use crate::table::{csv_field, markdown};

/// Background rows drawn for Kernel SHAP.
const SHAP_BACKGROUND: usize = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream owned by instance `index` under `global`.
pub fn instance_seed(global: u64, index: u64) -> u64 {
    splitmix64(splitmix64(global) ^ index)
}

/// The configured explainers for one classifier and training set.
///
/// Building the suite fits the SILO forest and draws the SHAP background
/// once; explaining a query afterwards only reads shared state, so queries
/// can run in parallel. LIME and sampled SHAP derive their streams from
/// `(seed, method, instance index)`.
#[derive(Debug, Clone)]
pub struct ExplainerSuite {
    pub seed: u64,
    pub label: usize,
    pub lime: LimeConfig,
    pub fallback_eps: Option<f64>,
    silo: Option<SiloExplainer>,
    shap: Option<ShapConfig>,
}

impl ExplainerSuite {
    /// Prepares `methods` with default settings. `train` must be in the
    /// same (standardized) coordinates as the queries.
    pub fn new<C: Classifier + ?Sized>(
        classifier: &C,
        train: &ClassificationProblem,
        label: usize,
        methods: &[Method],
        seed: u64,
    ) -> Result<Self> {
        Self::with_configs(
            classifier,
            train,
            label,
            methods,
            seed,
            LimeConfig::default(),
            SiloConfig::default(),
            None,
        )
    }

    /// Like [`ExplainerSuite::new`] with explicit settings. The seeds inside
    /// `lime` and `silo` are replaced by ones derived from `seed`; a `None`
    /// SHAP mode picks exact enumeration when the feature count allows.
    #[allow(clippy::too_many_arguments)]
    pub fn with_configs<C: Classifier + ?Sized>(
        classifier: &C,
        train: &ClassificationProblem,
        label: usize,
        methods: &[Method],
        seed: u64,
        lime: LimeConfig,
        silo: SiloConfig,
        shap_mode: Option<ShapMode>,
    ) -> Result<Self> {
        check_len(classifier.num_features(), train.num_features())?;
        let k = train.num_features();
        lime.validate(k)?;
        let silo = if methods.contains(&Method::Silo) {
            let cfg = SiloConfig {
                seed: instance_seed(seed, method_tag(Method::Silo)),
                ..silo
            };
            Some(SiloExplainer::fit(classifier, train.features(), label, &cfg)?)
        } else {
            None
        };
        let shap = if methods.contains(&Method::Shap) {
            let background = sample_background(
                train.features(),
                SHAP_BACKGROUND,
                instance_seed(seed, method_tag(Method::Shap)),
            );
            Some(ShapConfig::new(background, shap_mode.unwrap_or(ShapMode::auto(k)), 0))
        } else {
            None
        };
        Ok(Self {
            seed,
            label,
            lime,
            fallback_eps: None,
            silo,
            shap,
        })
    }

    pub fn shap_mode(&self) -> Option<ShapMode> {
        self.shap.as_ref().map(|s| s.mode)
    }

    pub fn silo(&self) -> Option<&SiloExplainer> {
        self.silo.as_ref()
    }

    /// Scores of `method` for the query with the given instance index.
    pub fn explain<C: Classifier + ?Sized>(
        &self,
        classifier: &C,
        method: Method,
        x: &Instance,
        index: usize,
    ) -> Result<AttributionScores> {
        let stream = instance_seed(instance_seed(self.seed, method_tag(method)), index as u64);
        match method {
            Method::Grad => gradient_scores(classifier, x, self.label, self.fallback_eps),
            Method::Lime => {
                let cfg = LimeConfig {
                    seed: stream,
                    ..self.lime.clone()
                };
                lime_scores(classifier, x, self.label, &cfg)
            }
            Method::Silo => {
                let silo = self.silo.as_ref().ok_or_else(|| not_prepared(method))?;
                silo_scores(classifier, x, self.label, silo)
            }
            Method::Shap => {
                let shap = self.shap.as_ref().ok_or_else(|| not_prepared(method))?;
                let cfg = ShapConfig {
                    seed: stream,
                    ..shap.clone()
                };
                kernel_shap_scores(classifier, x, self.label, &cfg)
            }
        }
    }

    /// Scores for every instance, computed in parallel and returned in
    /// instance order.
    pub fn explain_all<C: Classifier + ?Sized>(
        &self,
        classifier: &C,
        method: Method,
        instances: &[Instance],
    ) -> Result<Vec<AttributionScores>> {
        instances
            .par_iter()
            .enumerate()
            .map(|(i, x)| self.explain(classifier, method, x, i))
            .collect()
    }
}

fn method_tag(method: Method) -> u64 {
    method as u64 + 1
}

fn not_prepared(method: Method) -> Error {
    Error::config(format!("the explainer suite was built without '{method}'"))
}

/// Per-feature scores of several methods for one input, laid out with one
/// row per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub feature_names: Vec<String>,
    pub weights: Option<Vec<f64>>,
    pub columns: Vec<(Method, Vec<f64>)>,
}

impl ScoreTable {
    pub fn new(
        feature_names: Vec<String>,
        weights: Option<Vec<f64>>,
        columns: Vec<(Method, Vec<f64>)>,
    ) -> Result<Self> {
        let k = feature_names.len();
        if let Some(w) = &weights {
            check_len(k, w.len())?;
        }
        for (_, c) in &columns {
            check_len(k, c.len())?;
        }
        Ok(Self {
            feature_names,
            weights,
            columns,
        })
    }

    /// Row order: ascending weight when weights are present, otherwise
    /// ascending gradient score, otherwise file order.
    pub fn row_order(&self) -> Vec<usize> {
        let key = self.weights.as_ref().or_else(|| {
            self.columns
                .iter()
                .find(|(m, _)| *m == Method::Grad)
                .map(|(_, c)| c)
        });
        let mut order: Vec<usize> = (0..self.feature_names.len()).collect();
        if let Some(key) = key {
            order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
        }
        order
    }

    fn headings(&self) -> Vec<&'static str> {
        let mut h = vec!["feature_name"];
        if self.weights.is_some() {
            h.push("weight");
        }
        h.extend(self.columns.iter().map(|(m, _)| m.name()));
        h
    }

    fn cells(&self, row: usize, digits: usize) -> Vec<String> {
        let mut cells = vec![self.feature_names[row].clone()];
        if let Some(w) = &self.weights {
            cells.push(format!("{:.digits$}", w[row]));
        }
        cells.extend(self.columns.iter().map(|(_, c)| format!("{:.digits$}", c[row])));
        cells
    }

    /// CSV body with full precision.
    pub fn to_csv(&self) -> String {
        let mut out = self.headings().join(",");
        out.push('\n');
        for row in self.row_order() {
            let mut cells = self.cells(row, 17);
            cells[0] = csv_field(&cells[0]);
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Aligned markdown table with three decimals.
    pub fn to_markdown(&self) -> String {
        let head: Vec<String> = self.headings().iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = self.row_order().into_iter().map(|r| self.cells(r, 3)).collect();
        markdown(&head, &rows)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::classifiers::LogisticRegressionModel;
    use crate::domain::{FeatureSchema, POSITIVE};

    fn problem() -> ClassificationProblem {
        let features: Vec<Vec<f64>> = (0..120)
            .map(|i| vec![(i as f64 * 0.3).sin(), (i as f64 * 0.7).cos(), (i % 5) as f64 - 2.0])
            .collect();
        let targets = features.iter().map(|r| usize::from(r[0] + r[1] > 0.0)).collect();
        ClassificationProblem::new(
            Arc::new(FeatureSchema::anonymous(3).unwrap()),
            vec!["0".into(), "1".into()],
            features,
            targets,
        )
        .unwrap()
    }

    #[test]
    fn seeds_differ_by_index_and_global() {
        assert_ne!(instance_seed(42, 0), instance_seed(42, 1));
        assert_ne!(instance_seed(42, 0), instance_seed(43, 0));
        assert_eq!(instance_seed(42, 7), instance_seed(42, 7));
    }

    #[test]
    fn parallel_results_match_sequential() {
        let p = problem();
        let m = LogisticRegressionModel::from_parameters(vec![1.0, -2.0, 0.5], 0.1).unwrap();
        let suite = ExplainerSuite::new(&m, &p, POSITIVE, &Method::ALL, 11).unwrap();
        let xs: Vec<Instance> = p.instances().take(6).collect();
        for method in Method::ALL {
            let all = suite.explain_all(&m, method, &xs).unwrap();
            for (i, x) in xs.iter().enumerate() {
                assert_eq!(all[i], suite.explain(&m, method, x, i).unwrap());
            }
        }
    }

    #[test]
    fn missing_method_is_reported() {
        let p = problem();
        let m = LogisticRegressionModel::from_parameters(vec![1.0, -2.0, 0.5], 0.1).unwrap();
        let suite = ExplainerSuite::new(&m, &p, POSITIVE, &[Method::Grad], 1).unwrap();
        let x = p.instance(0).unwrap();
        assert!(suite.explain(&m, Method::Silo, &x, 0).is_err());
    }

    #[test]
    fn table_rows_follow_weights() {
        let t = ScoreTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            Some(vec![0.5, -1.0, 0.1]),
            vec![(Method::Grad, vec![0.1, -0.2, 0.02])],
        )
        .unwrap();
        assert_eq!(t.row_order(), vec![1, 2, 0]);
        let csv = t.to_csv();
        assert!(csv.starts_with("feature_name,weight,grad\nb,"));
        let md = t.to_markdown();
        assert!(md.lines().nth(2).unwrap().contains("-1.000"));
    }
}
