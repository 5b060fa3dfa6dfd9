use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{dataset_name, write_output, AuditArgs, BenchArgs, CompareArgs, ExplainArgs, TrainArgs};
use crate::attribution::{gradient_scores, instance_seed, ExplainerSuite, Method, ScoreTable};
use crate::classifiers::io::ModelFile;
use crate::classifiers::{Activation, Model};
use crate::domain::{AttributionScores, Instance, POSITIVE};
use crate::error::{Error, Result};
use crate::eval::{fidelity_vs_reference, runtime_bench, FidelityRow, FidelityTable, RuntimeRow, RuntimeTable};
use crate::faithfulness::{
    adaptive_probe, error_decay, error_dominance, probe_csv, qualitative_probe, sign_agreement,
    strong_probe, FeatureStatus, ProbeRecord, StrongStatus, DEFAULT_STEP_FRACTIONS,
};
use crate::ingest::{load_csv, LabelColumn, Split, SplitSpec};
use crate::pipeline::{self, rebuild_split, ModelKind, TrainOptions};

/// What a command printed and which files it wrote.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: String,
    pub files: Vec<PathBuf>,
}

pub fn train(a: &TrainArgs, out_dir: &Path, header: &str) -> Result<Outcome> {
    let kind = ModelKind::parse(&a.model)?;
    let problem = load_csv(&a.data, &LabelColumn::from_option(a.label.as_deref()))?;
    let mut opts = TrainOptions::for_kind(kind);
    if kind == ModelKind::Mlp {
        opts.hidden = a.hidden.clone();
        opts.activation = Activation::parse(&a.activation)?;
    }
    if let Some(v) = a.max_iter {
        opts.train.max_iterations = v;
    }
    if let Some(v) = a.learning_rate {
        opts.train.learning_rate = v;
    }
    if let Some(v) = a.l2 {
        opts.train.l2_strength = v;
    }
    opts.train.seed = a.seed;
    opts.split = SplitSpec {
        test_fraction: a.test_fraction,
        seed: a.split_seed,
        shuffle: !a.no_shuffle,
    };
    opts.split.validate()?;

    let mut trained = pipeline::train(&problem, &opts)?;
    trained.file.label_column = a.label.clone();
    let name = dataset_name(&a.data);
    let model_path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{name}-{}.model.json", kind.name())));
    if let Some(parent) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    trained.file.save(&model_path)?;

    let m = trained.test_metrics;
    let body = format!(
        "dataset,classifier,accuracy,f1,train_rows,test_rows,iterations,final_loss\n\
         {name},{},{:.6},{:.6},{},{},{},{:.6}\n",
        kind.name(),
        m.accuracy,
        m.f1,
        trained.split.train.len(),
        trained.split.test.len(),
        trained.summary.iterations,
        trained.summary.final_loss,
    );
    let metrics = write_output(out_dir, &format!("train-{name}-{}.csv", kind.name()), header, &body)?;
    Ok(Outcome {
        report: format!("{header}\n{body}"),
        files: vec![model_path, metrics],
    })
}

struct Loaded {
    name: String,
    file: ModelFile,
    split: Split,
}

impl Loaded {
    fn open(model: &Path, data: &Path) -> Result<Self> {
        let file = ModelFile::load(model)?;
        let problem = load_csv(data, &LabelColumn::from_option(file.label_column.as_deref()))?;
        let split = rebuild_split(&file, &problem)?;
        Ok(Self {
            name: dataset_name(data),
            file,
            split,
        })
    }

    fn model(&self) -> &Model {
        &self.file.model
    }

    fn test_instances(&self) -> Vec<Instance> {
        self.split.test.instances().collect()
    }

    fn suite(&self, methods: &[Method], seed: u64) -> Result<ExplainerSuite> {
        ExplainerSuite::new(self.model(), &self.split.train, POSITIVE, methods, seed)
    }

    fn classifier_name(&self) -> &'static str {
        match self.model() {
            Model::Logistic(_) => ModelKind::Lr.name(),
            Model::Mlp(_) => ModelKind::Mlp.name(),
        }
    }
}

/// Parsed method list in table order.
fn methods(list: &str) -> Result<Vec<Method>> {
    let mut m = Method::parse_list(list)?;
    m.sort();
    Ok(m)
}

pub fn explain(a: &ExplainArgs, out_dir: &Path, header: &str) -> Result<Outcome> {
    let methods = methods(&a.methods)?;
    let l = Loaded::open(&a.model, &a.data)?;
    let x = l.split.test.instance(a.index)?;
    let suite = l.suite(&methods, a.seed)?;
    let columns = methods
        .iter()
        .map(|&m| Ok((m, suite.explain(l.model(), m, &x, a.index)?.scores().to_vec())))
        .collect::<Result<Vec<_>>>()?;
    let weights = l.model().as_logistic().map(|m| m.weights().to_vec());
    let table = ScoreTable::new(l.file.feature_names.clone(), weights, columns)?;
    let path = write_output(
        out_dir,
        &format!("explain-{}-{}.csv", l.name, a.index),
        header,
        &table.to_csv(),
    )?;
    Ok(Outcome {
        report: format!("{header}\n{}", table.to_markdown()),
        files: vec![path],
    })
}

#[derive(Debug, Default, Clone, Copy)]
struct AuditTally {
    tested: usize,
    violated: usize,
    strong_total: usize,
    strong_violated: usize,
    decay_passed: usize,
    agree: usize,
    compared: usize,
    dominance_defined: usize,
    dominance_passed: usize,
}

impl AuditTally {
    fn add(&mut self, o: &AuditTally) {
        self.tested += o.tested;
        self.violated += o.violated;
        self.strong_total += o.strong_total;
        self.strong_violated += o.strong_violated;
        self.decay_passed += o.decay_passed;
        self.agree += o.agree;
        self.compared += o.compared;
        self.dominance_defined += o.dominance_defined;
        self.dominance_passed += o.dominance_passed;
    }
}

fn rate(num: usize, den: usize) -> String {
    if den == 0 {
        "NA".into()
    } else {
        format!("{:.6}", num as f64 / den as f64)
    }
}

fn audit_instance(
    a: &AuditArgs,
    l: &Loaded,
    suite: &ExplainerSuite,
    method: Method,
    label: &str,
    index: usize,
    x: &Instance,
) -> Result<(Vec<ProbeRecord>, AuditTally)> {
    let model = l.model();
    let names = &l.file.feature_names;
    let mut scores = suite.explain(model, method, x, index)?;
    if a.negate {
        scores = scores.with_scores(scores.scores().iter().map(|s| -s).collect())?;
    }
    let grad = gradient_scores(model, x, POSITIVE, None)?;
    let mut records = Vec::new();
    let mut tally = AuditTally::default();
    let record = |feature: &str, verdict: String, epsilon: f64, ratios: Vec<f64>| ProbeRecord {
        dataset: l.name.clone(),
        method: label.to_string(),
        instance_id: index,
        feature: feature.to_string(),
        verdict,
        epsilon,
        ratio_sequence: ratios,
    };

    let (verdict, required) = if a.adaptive {
        let v = adaptive_probe(model, &scores, a.eps, a.floor, a.gate, &DEFAULT_STEP_FRACTIONS)?;
        (v.verdict, v.gated)
    } else {
        let v = qualitative_probe(model, &scores, a.eps, &DEFAULT_STEP_FRACTIONS)?;
        let required = v
            .statuses
            .iter()
            .map(|s| *s != FeatureStatus::ZeroScoreUntested)
            .collect();
        (v, required)
    };
    for (i, (status, req)) in verdict.statuses.iter().zip(&required).enumerate() {
        if *req {
            tally.tested += 1;
            tally.violated += usize::from(*status != FeatureStatus::Consistent);
        }
        records.push(record(
            &names[i],
            format!("qualitative:{}", status.as_str()),
            verdict.epsilon_used,
            Vec::new(),
        ));
    }

    let strong = strong_probe(model, &scores, verdict.epsilon_used, a.tolerance, &DEFAULT_STEP_FRACTIONS)?;
    for (i, status) in strong.statuses.iter().enumerate() {
        tally.strong_total += 1;
        tally.strong_violated += usize::from(*status == StrongStatus::Violated);
        records.push(record(
            &names[i],
            format!("strong:{}", status.as_str()),
            strong.epsilon_used,
            Vec::new(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(a.seed, index as u64));
    let direction: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let decay = error_decay(model, scores.scores(), x, POSITIVE, &direction, a.h0, a.levels)?;
    tally.decay_passed += usize::from(decay.passed);
    records.push(record("*", pass_fail("decay", decay.passed), a.h0, decay.ratios));

    let signs = sign_agreement(grad.scores(), scores.scores())?;
    for (i, agree) in signs.agree.iter().enumerate() {
        tally.compared += 1;
        tally.agree += usize::from(*agree);
        let verdict = if *agree { "sign:AGREE" } else { "sign:DISAGREE" };
        records.push(record(&names[i], verdict.into(), 0.0, Vec::new()));
    }

    let gap: Vec<f64> = scores.scores().iter().zip(grad.scores()).map(|(s, g)| s - g).collect();
    let dominance = if gap.iter().all(|d| *d == 0.0) {
        Err(Error::Undefined("scores equal the gradient".into()))
    } else {
        error_dominance(model, grad.scores(), scores.scores(), x, POSITIVE, &gap, a.h0, a.levels)
    };
    match dominance {
        Ok(d) => {
            tally.dominance_defined += 1;
            tally.dominance_passed += usize::from(d.passed);
            records.push(record("*", pass_fail("dominance", d.passed), a.h0, d.ratios));
        }
        Err(Error::Undefined(_)) => {
            records.push(record("*", "dominance:UNDEFINED".into(), a.h0, Vec::new()));
        }
        Err(e) => return Err(e),
    }
    Ok((records, tally))
}

fn pass_fail(probe: &str, passed: bool) -> String {
    format!("{probe}:{}", if passed { "PASS" } else { "FAIL" })
}

pub fn audit(a: &AuditArgs, out_dir: &Path, header: &str) -> Result<Outcome> {
    let method: Method = a.method.parse()?;
    let l = Loaded::open(&a.model, &a.data)?;
    let mut xs = l.test_instances();
    if let Some(n) = a.limit {
        xs.truncate(n);
    }
    if xs.is_empty() {
        return Err(Error::config("no test instances to audit"));
    }
    let suite = l.suite(&[method], a.seed)?;
    let label = if a.negate {
        format!("neg-{method}")
    } else {
        method.to_string()
    };
    let per_instance = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| audit_instance(a, &l, &suite, method, &label, i, x))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut t = AuditTally::default();
    for (r, tally) in per_instance {
        records.extend(r);
        t.add(&tally);
    }

    let summary = format!(
        "dataset,method,instances,qualitative_violation_rate,strong_violation_rate,\
         error_decay_pass_rate,sign_agreement,dominance_pass_rate\n{},{},{},{},{},{},{},{}\n",
        l.name,
        label,
        xs.len(),
        rate(t.violated, t.tested),
        rate(t.strong_violated, t.strong_total),
        rate(t.decay_passed, xs.len()),
        rate(t.agree, t.compared),
        rate(t.dominance_passed, t.dominance_defined),
    );
    let stem = format!("audit-{}-{label}", l.name);
    let probes = write_output(out_dir, &format!("{stem}.csv"), header, &probe_csv(&records))?;
    let rates = write_output(out_dir, &format!("{stem}-summary.csv"), header, &summary)?;
    Ok(Outcome {
        report: format!("{header}\n{summary}"),
        files: vec![probes, rates],
    })
}

fn pairs<'a>(models: &'a [PathBuf], data: &'a [PathBuf]) -> Result<Vec<(&'a PathBuf, &'a PathBuf)>> {
    if models.len() != data.len() {
        return Err(Error::config(format!(
            "got {} --model and {} --data flags; they pair up by position",
            models.len(),
            data.len()
        )));
    }
    Ok(models.iter().zip(data).collect())
}

fn fidelity_rows(l: &Loaded, suite: &ExplainerSuite, methods: &[Method]) -> Result<Vec<FidelityRow>> {
    let xs = l.test_instances();
    let model = l.model();
    let reference: Vec<Vec<f64>> = match model.as_logistic() {
        Some(lr) => vec![lr.weights().to_vec(); xs.len()],
        None => suite
            .explain_all(model, Method::Grad, &xs)?
            .into_iter()
            .map(|s| s.scores().to_vec())
            .collect(),
    };
    methods
        .iter()
        .map(|&m| {
            let scores: Vec<Vec<f64>> = suite
                .explain_all(model, m, &xs)?
                .iter()
                .map(|s| s.scores().to_vec())
                .collect();
            let f = fidelity_vs_reference(&reference, &scores)?;
            Ok(FidelityRow {
                dataset: l.name.clone(),
                method: m,
                mean_rho: f.mean_rho,
                instances: f.instances,
                excluded: f.excluded,
            })
        })
        .collect()
}

fn runtime_rows(
    l: &Loaded,
    suite: &ExplainerSuite,
    methods: &[Method],
    instances: usize,
    repetitions: usize,
) -> Result<Vec<RuntimeRow>> {
    let mut xs = l.test_instances();
    xs.truncate(instances.max(1));
    let model = l.model();
    methods
        .iter()
        .map(|&m| {
            let mean_ms = runtime_bench(&xs, repetitions, |i, x| {
                suite.explain(model, m, x, i).map(|s: AttributionScores| {
                    std::hint::black_box(s);
                })
            })?;
            Ok(RuntimeRow {
                classifier: l.classifier_name().into(),
                dataset: l.name.clone(),
                method: m,
                mean_ms,
            })
        })
        .collect()
}

pub fn compare(a: &CompareArgs, out_dir: &Path, header: &str) -> Result<Outcome> {
    let methods = methods(&a.methods)?;
    let mut fidelity = FidelityTable::default();
    let mut runtime = RuntimeTable::default();
    for (model, data) in pairs(&a.model, &a.data)? {
        let l = Loaded::open(model, data)?;
        let suite = l.suite(&methods, a.seed)?;
        for row in fidelity_rows(&l, &suite, &methods)? {
            fidelity.push(row);
        }
        if !a.no_bench {
            for row in runtime_rows(&l, &suite, &methods, a.bench_instances, a.repetitions)? {
                runtime.push(row);
            }
        }
    }
    let mut files = vec![
        write_output(out_dir, "compare-fidelity.csv", header, &fidelity.to_csv())?,
        write_output(out_dir, "compare-fidelity.md", header, &fidelity.to_markdown())?,
    ];
    let mut report = format!("{header}\n{}", fidelity.to_markdown());
    if !a.no_bench {
        files.push(write_output(out_dir, "compare-runtime.csv", header, &runtime.to_csv())?);
        files.push(write_output(out_dir, "compare-runtime.md", header, &runtime.to_markdown())?);
        report.push('\n');
        report.push_str(&runtime.to_markdown());
    }
    Ok(Outcome { report, files })
}

pub fn bench(a: &BenchArgs, out_dir: &Path, header: &str) -> Result<Outcome> {
    let methods = methods(&a.methods)?;
    let mut runtime = RuntimeTable::default();
    for (model, data) in pairs(&a.model, &a.data)? {
        let l = Loaded::open(model, data)?;
        let suite = l.suite(&methods, a.seed)?;
        for row in runtime_rows(&l, &suite, &methods, a.instances, a.repetitions)? {
            runtime.push(row);
        }
    }
    let files = vec![
        write_output(out_dir, "bench-runtime.csv", header, &runtime.to_csv())?,
        write_output(out_dir, "bench-runtime.md", header, &runtime.to_markdown())?,
    ];
    Ok(Outcome {
        report: format!("{header}\n{}", runtime.to_markdown()),
        files,
    })
}
