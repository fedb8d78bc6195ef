//! `sulearn` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sulearn::SuError;

#[derive(Parser, Debug)]
#[command(name = "sulearn", version, about = "Binary classification from similar pairs and unlabeled points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a labeled synthetic dataset in LIBSVM format.
    Generate(GenerateArgs),
    /// Draw an SU dataset (pairs plus unlabeled points) from labeled data.
    Sample(SampleArgs),
    /// Train a classifier on an SU dataset.
    Train(TrainArgs),
    /// Score points with a trained model.
    Predict(PredictArgs),
    /// Evaluate a trained model on labeled data.
    Eval(EvalArgs),
    /// Estimate the class prior from an SU dataset.
    EstimatePrior(EstimatePriorArgs),
    /// Test error against the number of unlabeled points.
    SweepNu(SweepNuArgs),
    /// Prior-estimation error against data size.
    PriorCurve(PriorCurveArgs),
    /// SU classifiers against k-means by clustering accuracy.
    Benchmark(BenchmarkArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    Banana,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorMode {
    /// Estimate and call the larger class positive.
    AssumePlusLarger,
    /// Estimate, knowing the negative class is larger.
    SignKnownMinusLarger,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Linear,
    Rbf,
}

/// Synthetic family flags shared by `generate` and the experiments.
#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Input dimension of the Gaussian family.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Distance between the Gaussian class means.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Jitter of the banana family.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Labeled LIBSVM file to sample from instead of a synthetic family.
    #[arg(long, requires = "test")]
    pub pool: Option<PathBuf>,
    /// Labeled LIBSVM test file used with `--pool`.
    #[arg(long, requires = "pool")]
    pub test: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub pi_plus: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Labeled LIBSVM file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub pi_plus: f64,
    #[arg(long)]
    pub n_s: usize,
    #[arg(long)]
    pub n_u: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw each labeled point at most once.
    #[arg(long)]
    pub without_replacement: bool,
    /// Drop the hidden labels from the output.
    #[arg(long)]
    pub strip_labels: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// SU dataset JSON.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "double-hinge")]
    pub loss: String,
    /// Fixed regularization; cross-validated over `--grid` when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Known class prior.
    #[arg(long, conflicts_with = "estimate_prior")]
    pub pi_plus: Option<f64>,
    #[arg(long, value_enum)]
    pub estimate_prior: Option<PriorMode>,
    #[arg(long, value_enum, default_value = "linear")]
    pub basis: BasisKind,
    #[arg(long, default_value_t = 100)]
    pub centers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Training report JSON; printed to stdout when absent.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// LIBSVM file; labels are ignored.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV with `score,label`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled LIBSVM file.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimatePriorArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "assume-plus-larger")]
    pub case: PriorMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed kernel bandwidth instead of the median heuristic.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Include the distance trace in the output.
    #[arg(long)]
    pub diagnostics: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags shared by the experiment commands.
#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pi_plus: Option<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run summary JSON; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepNuArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long)]
    pub n_s: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_u_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub test_size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PriorCurveArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long)]
    pub n_s: Option<usize>,
    #[arg(long)]
    pub n_u: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisKind>,
    /// Use `--pi-plus` as given instead of estimating it.
    #[arg(long)]
    pub given_prior: bool,
}

fn exit_code(e: &SuError) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, SuError::InvalidArgument(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Sample(a) => commands::sample(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::EstimatePrior(a) => commands::estimate_prior(a),
        Command::SweepNu(a) => commands::sweep_nu(a),
        Command::PriorCurve(a) => commands::prior_curve(a),
        Command::Benchmark(a) => commands::benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
