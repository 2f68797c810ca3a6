use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecoc_core::ErrorKind;

mod commands;

#[derive(Parser)]
#[command(
    name = "ecoc",
    version,
    about = "Error-correcting output code ensembles and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method on a whole dataset and write a model archive.
    Train(TrainArgs),
    /// Label the rows of a CSV file or image directory with a saved model.
    Predict(PredictArgs),
    /// Accuracy and confusion matrix of a saved model on labeled data.
    Evaluate(EvaluateArgs),
    /// Repeated-split comparison of every configured method.
    Benchmark(BenchArgs),
    /// Accuracy as a function of ECOC code length.
    SweepCode(SweepArgs),
    /// Accuracy as a function of the number of PCA components.
    SweepFeatures(SweepArgs),
    /// Write a synthetic Gaussian-blob dataset as CSV.
    Synth(SynthArgs),
    /// Generate or inspect a coding matrix.
    Code(CodeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Pic {
    Svm,
    Knn,
    Tree,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    Svm,
    Dt,
    Knn,
    Nn,
    Bagging,
    Boosting,
    Ecoc,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DecodingArg {
    Hard,
    Soft,
}

/// Settings shared by every command that builds an experiment config.
/// Flags override values from `--config`.
#[derive(Args, Clone, Default)]
pub struct Overrides {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled CSV file (label in the last column) or a directory of
    /// per-class PGM subdirectories. Defaults to the desk32 synthetic set.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// PCA components; 0 disables PCA.
    #[arg(long)]
    pub pca_k: Option<usize>,
    #[arg(long)]
    pub code_length: Option<usize>,
    /// Plug-in classifier for ECOC columns.
    #[arg(long, value_enum)]
    pub pic: Option<Pic>,
    #[arg(long, value_enum)]
    pub decoding: Option<DecodingArg>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_gamma: Option<f64>,
    /// Side length images are resized to.
    #[arg(long)]
    pub image_size: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "ecoc")]
    pub method: Method,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Where to write the model archive.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Model archive written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with or without a trailing label column, or an image directory.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub image_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub image_size: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Restrict the run to these methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 32)]
    pub classes: usize,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 3.0)]
    pub center_spread: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CodeArgs {
    /// Number of classes for a generated code.
    #[arg(long, default_value_t = 32)]
    pub classes: usize,
    #[arg(long, default_value_t = 150)]
    pub code_length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate the identity one-vs-all code instead of a random one.
    #[arg(long)]
    pub one_vs_all: bool,
    /// Inspect an existing matrix (archive, JSON object, or one 0/1 row
    /// per line) instead of generating one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// PiC error rates for the correct-decoding bound table.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2, 0.3])]
    pub p_prime: Vec<f64>,
    #[command(flatten)]
    pub output: Output,
    /// Also write the matrix as an archive.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Training => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::SweepCode(a) => commands::sweep_code(a),
        Command::SweepFeatures(a) => commands::sweep_features(a),
        Command::Synth(a) => commands::synth(a),
        Command::Code(a) => commands::code(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
