//! The `faithful` command line.
//!
//! Every table the commands write starts with a comment line recording the
//! tool version, the seed and a hash of the effective settings, e.g.
//! `# faithful 0.1.0 seed=42 config=3f9a01c2d4e5`. Output files go to
//! `--out-dir`, else `$FAITHFUL_OUT_DIR`, else `./faithful-out`.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use commands::{audit, bench, compare, explain, train, Outcome};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FAITHFUL_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "faithful-out";

#[derive(Debug, Parser)]
#[command(name = "faithful", version, about = "Feature attribution and faithfulness probes for tabular classifiers")]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for parallel stages; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Split, standardize and train a classifier; prints accuracy and F1.
    Train(TrainArgs),
    /// Score one test instance with several attribution methods.
    Explain(ExplainArgs),
    /// Run the faithfulness probes for one method over the test split.
    Audit(AuditArgs),
    /// Rank agreement with the reference scores, plus timings.
    Compare(CompareArgs),
    /// Time each method per explanation.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// lr or mlp.
    #[arg(long, default_value = "lr")]
    pub model: String,
    /// Label column name; defaults to the last column.
    #[arg(long)]
    pub label: Option<String>,
    /// Hidden layer sizes for the MLP, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,8,8,8,8")]
    pub hidden: Vec<usize>,
    /// relu, tanh or logistic.
    #[arg(long, default_value = "relu")]
    pub activation: String,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Seed for initialization and mini-batch order.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 42)]
    pub split_seed: u64,
    #[arg(long, default_value_t = false)]
    pub no_shuffle: bool,
    /// Model file to write; defaults to `<out-dir>/<dataset>-<model>.model.json`.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Position in the test split.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value = "grad,silo,lime,shap")]
    pub methods: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// grad, silo, lime or shap.
    #[arg(long, default_value = "grad")]
    pub method: String,
    /// Flip the sign of every score before probing.
    #[arg(long, default_value_t = false)]
    pub negate: bool,
    /// Probe radius in standardized units.
    #[arg(long, default_value_t = 3.0)]
    pub eps: f64,
    /// Halve the radius until gated features pass.
    #[arg(long, default_value_t = false)]
    pub adaptive: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub floor: f64,
    /// Scores at or below this magnitude are not required to pass.
    #[arg(long, default_value_t = 1e-4)]
    pub gate: f64,
    /// Largest change a zero-scored feature may cause.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// First step of the error-decay and dominance sequences.
    #[arg(long, default_value_t = 0.5)]
    pub h0: f64,
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    /// Audit only the first N test instances.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Model file; repeat together with --data for several datasets.
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, default_value = "grad,silo,lime,shap")]
    pub methods: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Timed passes over the benchmark instances.
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// Test instances used for timing.
    #[arg(long, default_value_t = 20)]
    pub bench_instances: usize,
    /// Skip the timing table.
    #[arg(long, default_value_t = false)]
    pub no_bench: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, default_value = "grad,silo,lime,shap")]
    pub methods: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Explain(_) => "explain",
            Command::Audit(_) => "audit",
            Command::Compare(_) => "compare",
            Command::Bench(_) => "bench",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Command::Train(a) => a.seed,
            Command::Explain(a) => a.seed,
            Command::Audit(a) => a.seed,
            Command::Compare(a) => a.seed,
            Command::Bench(a) => a.seed,
        }
    }
}

/// First 12 hex digits of the SHA-256 of the command's settings. Output
/// locations and worker counts do not enter the hash.
pub fn config_hash(command: &Command) -> String {
    let json = serde_json::to_vec(command).expect("arguments serialize");
    Sha256::digest(&json)
        .iter()
        .take(6)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The comment line placed at the top of every output.
pub fn header_line(command: &Command) -> String {
    format!(
        "# faithful {} seed={} config={}",
        env!("CARGO_PKG_VERSION"),
        command.seed(),
        config_hash(command)
    )
}

/// Where output files go when `--out-dir` is absent.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs a parsed command, writing the console report to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    let out_dir = cli.out_dir.clone().unwrap_or_else(default_out_dir);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} workers: {e}", cli.workers)))?;
    let header = header_line(&cli.command);
    let outcome = pool.install(|| match &cli.command {
        Command::Train(a) => train(a, &out_dir, &header),
        Command::Explain(a) => explain(a, &out_dir, &header),
        Command::Audit(a) => audit(a, &out_dir, &header),
        Command::Compare(a) => compare(a, &out_dir, &header),
        Command::Bench(a) => bench(a, &out_dir, &header),
    })?;
    stdout.write_all(outcome.report.as_bytes())?;
    Ok(outcome)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage error, 2 data error, 3 numerical
/// failure.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(outcome) => {
            for path in &outcome.files {
                let _ = writeln!(stderr, "wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point of the binary.
pub fn run() -> i32 {
    run_from(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn write_output(dir: &Path, name: &str, header: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, format!("{header}\n{body}"))?;
    Ok(path)
}

/// Lowercased file stem, used as the dataset name in tables.
fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_else(|| "dataset".into())
}
