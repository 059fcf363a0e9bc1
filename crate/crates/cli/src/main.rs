use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use transfer_knn::classifiers::LepskiWidth;
use transfer_knn::simulation::{Figure, RateSweep};

mod run;

/// Transfer-learning K-NN classifiers under posterior drift.
#[derive(Debug, Parser)]
#[command(name = "transfer-knn", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one of the simulation studies and write a tidy CSV.
    Simulate(SimulateArgs),
    /// Fit the log-log slope of excess risk against sample size.
    RateCheck(RateArgs),
    /// Train on a labeled CSV and label the rows of a test CSV.
    Predict(PredictArgs),
    /// Report accuracy and, under the synthetic model, excess risk.
    Eval(EvalArgs),
}

/// Parameters shared by every subcommand that builds a plan or a model.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Relative signal exponent(s), comma separated for several sources.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Smoothness exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Margin exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Feature dimension of the synthetic model.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_parser = parse_figure)]
    figure: Figure,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    reps: Option<usize>,
    /// Source size, or the swept grid for n_P studies.
    #[arg(long, value_delimiter = ',')]
    np: Option<Vec<usize>>,
    #[arg(long)]
    nq: Option<usize>,
    /// Peak value, or the swept grid for p_max studies.
    #[arg(long, value_delimiter = ',')]
    pmax: Option<Vec<f64>>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_width, default_value = "algorithm3")]
    lepski_width: LepskiWidth,
    /// Results CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines manifest; defaults to the output path with `.manifest.jsonl`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Target,
    Source,
}

impl From<SweepArg> for RateSweep {
    fn from(s: SweepArg) -> Self {
        match s {
            SweepArg::Target => RateSweep::Target,
            SweepArg::Source => RateSweep::Source,
        }
    }
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum, default_value = "target")]
    sweep: SweepArg,
    /// Sample sizes along the sweep.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    n_mc: Option<usize>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    pmax: Option<f64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Writes the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictMethod {
    /// K-NN on the target rows.
    Knn,
    /// Two-sample weighted K-NN; all source rows form one source.
    Weighted,
    /// Adaptive signal-to-noise classifier.
    Adaptive,
    /// Multi-source weighted K-NN.
    Multisource,
    /// Multi-source adaptive classifier.
    MultisourceAdaptive,
    /// Lepski's rule on the target rows, or on all rows with `--pooled`.
    Lepski,
    /// K-NN on all rows.
    Combined,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifierArgs {
    #[arg(long, value_enum)]
    method: PredictMethod,
    /// Neighbor count for `knn` and `combined`; defaults to ⌊n^(2β/(2β+d))⌋.
    #[arg(long)]
    k: Option<usize>,
    /// Run `lepski` on the pooled rows.
    #[arg(long)]
    pooled: bool,
    #[arg(long, value_parser = parse_width, default_value = "algorithm3")]
    lepski_width: LepskiWidth,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Labeled training CSV (`x0..,y[,origin]`).
    #[arg(long)]
    train: PathBuf,
    /// Test CSV (`x0..[,y]`).
    #[arg(long)]
    test: PathBuf,
    /// Predictions CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Labeled training CSV; sampled from the synthetic model when omitted.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Labeled test CSV for an accuracy figure.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Peak value of the synthetic model; enables the excess-risk estimate.
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    nq: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    n_mc: usize,
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: transfer_knn::Error| e.to_string())
}

fn parse_width(s: &str) -> Result<LepskiWidth, String> {
    s.parse().map_err(|e: transfer_knn::Error| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => run::simulate(a, &argv),
        Command::RateCheck(a) => run::rate_check(a, &argv),
        Command::Predict(a) => run::predict(a),
        Command::Eval(a) => run::eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
