//! `foodlda`: preprocess images into a feature cache, fit PCA and LDA on a
//! seeded split, evaluate, predict single images and preview augmentation.
//!
//! Exit status: 0 success, 1 usage error, 2 data or runtime error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "foodlda", version, about = "PCA + Fisher LDA image classification pipeline")]
struct Cli {
    /// Worker threads for decoding and augmentation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode, filter, equalize and resize images into a feature cache.
    Preprocess(PreprocessArgs),
    /// Fit PCA on the training rows of a cache.
    Pca(PcaArgs),
    /// Fit the LDA classifier on PCA-projected training rows.
    LdaTrain(LdaTrainArgs),
    /// Score the held-out rows and report accuracy statistics.
    Evaluate(EvaluateArgs),
    /// Classify one image.
    Predict(PredictArgs),
    /// Write seeded augmented variants of one image.
    AugmentPreview(AugmentArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    #[arg(long, default_value_t = 0.75)]
    pub train_frac: f64,
    /// Held out from both training and testing.
    #[arg(long, default_value_t = 0.0)]
    pub val_frac: f64,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct FeatureArgs {
    /// PCA model applied before LDA.
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Feed preprocessed pixels to LDA directly.
    #[arg(long)]
    pub raw_pixels: bool,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Food-101 root containing images/ and meta/.
    #[arg(long, env = "FOOD101_ROOT")]
    pub root: PathBuf,
    /// Comma-separated class names (default: every class).
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 1)]
    pub median_radius: usize,
    #[arg(long)]
    pub no_equalize: bool,
    /// Restrict to one official meta list: all, train or test.
    #[arg(long, default_value = "all")]
    pub official_split: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub chunk: usize,
}

#[derive(Args, Debug)]
pub struct PcaArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value_t = foodlda::pca::DEFAULT_COMPONENTS)]
    pub k: usize,
    /// Keep the fewest of the fitted components reaching this cumulative ratio.
    #[arg(long)]
    pub target_variance: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub scree: Option<PathBuf>,
    /// CSV of the first two components of every training row.
    #[arg(long)]
    pub pc_scatter: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub chunk: usize,
}

#[derive(Args, Debug)]
pub struct LdaTrainArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Ridge added to the within-class scatter: a number or "auto".
    #[arg(long, default_value = "auto")]
    pub shrinkage: String,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV (ld1, ld2, label) of every training row.
    #[arg(long)]
    pub ld_scatter: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub chunk: usize,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long)]
    pub lda: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value_t = foodlda::evalstats::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub chunk: usize,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long)]
    pub lda: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Print every class posterior.
    #[arg(long)]
    pub probs: bool,
    #[arg(long, default_value_t = 1)]
    pub median_radius: usize,
    #[arg(long)]
    pub no_equalize: bool,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Index of the image within its dataset; selects the random stream.
    #[arg(long, default_value_t = 0)]
    pub image_index: usize,
    /// Zero every range and disable flipping.
    #[arg(long)]
    pub zero_range: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<foodlda::Error> for Failure {
    fn from(e: foodlda::Error) -> Self {
        if let foodlda::Error::BuildFailed { failures, .. } = &e {
            for (path, why) in failures {
                eprintln!("  {}: {why}", path.display());
            }
        }
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Preprocess(a) => commands::preprocess(a, cli.workers),
        Command::Pca(a) => commands::pca(a),
        Command::LdaTrain(a) => commands::lda_train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Predict(a) => commands::predict(a),
        Command::AugmentPreview(a) => commands::augment_preview(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
