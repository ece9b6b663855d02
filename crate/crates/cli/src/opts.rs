//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ledgerlens_core::scoring::FlagMode;

/// Unsupervised anomaly detection on categorical journal-entry data.
#[derive(Debug, Parser)]
#[command(name = "ledgerlens", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled benchmark dataset.
    Generate(GenerateArgs),
    /// Train autoencoder models on a dataset.
    Train(TrainArgs),
    /// Score a dataset under a trained model checkpoint.
    Score(ScoreArgs),
    /// Evaluate a score file against ground-truth labels.
    Evaluate(EvaluateArgs),
    /// Train, score, and evaluate a grid of architectures and seeds,
    /// with PCA and LOF baseline rows.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator configuration JSON; the built-in desk-scale benchmark
    /// when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(short, long, env = "LEDGERLENS_SEED")]
    pub seed: Option<u64>,

    /// Output directory for dataset.csv and vocab.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainKnobs {
    /// Learning rate.
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,

    /// Mini-batch size.
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,

    /// Epoch cap.
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,

    /// Consecutive low-improvement epochs before early stop.
    #[arg(long, default_value_t = 25)]
    pub patience: usize,

    /// Relative epoch-loss improvement below which an epoch counts as
    /// stalled.
    #[arg(long, default_value_t = 1e-5)]
    pub min_improvement: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV (attribute columns plus optional label/entry_id).
    #[arg(long)]
    pub data: PathBuf,

    /// Architecture: AE1..AE9 or an explicit comma-separated size list.
    #[arg(long)]
    pub arch: String,

    /// Training seeds; one checkpoint and trace per seed.
    #[arg(short, long, env = "LEDGERLENS_SEED", value_delimiter = ',', default_value = "42")]
    pub seed: Vec<u64>,

    #[command(flatten)]
    pub knobs: TrainKnobs,

    /// Epochs at which per-entry latent activations are dumped.
    #[arg(long, value_delimiter = ',')]
    pub latents_at: Vec<usize>,

    /// Epochs at which per-entry reconstruction errors are dumped.
    #[arg(long, value_delimiter = ',')]
    pub errors_at: Vec<usize>,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Flag on the combined anomaly score (AS >= beta).
    As,
    /// Flag on normalized reconstruction error alone (RE >= beta).
    ReOnly,
}

impl From<ModeArg> for FlagMode {
    fn from(mode: ModeArg) -> FlagMode {
        match mode {
            ModeArg::As => FlagMode::As,
            ModeArg::ReOnly => FlagMode::ReOnly,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScoringKnobs {
    /// Weight of RE in the combined score.
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,

    /// Flagging threshold.
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,

    /// Global/local split threshold on AS.
    #[arg(long, default_value_t = 0.4)]
    pub tau: f64,

    /// Flagging rule.
    #[arg(long, value_enum, default_value_t = ModeArg::As)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model checkpoint JSON.
    #[arg(long)]
    pub model: PathBuf,

    /// Dataset CSV to score.
    #[arg(long)]
    pub data: PathBuf,

    #[command(flatten)]
    pub scoring: ScoringKnobs,

    /// Output directory for scores.csv and scores.jsonl.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Score CSV produced by `score`.
    #[arg(long)]
    pub scores: PathBuf,

    /// Dataset CSV with the ground-truth label column.
    #[arg(long)]
    pub data: PathBuf,

    /// Top-k cutoff; defaults to the dataset's injected-anomaly count.
    #[arg(long)]
    pub k: Option<usize>,

    #[command(flatten)]
    pub scoring: ScoringKnobs,

    /// Output directory for report.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dataset CSV with ground-truth labels.
    #[arg(long)]
    pub data: PathBuf,

    /// Architectures to sweep (AE names or explicit size lists separated
    /// by semicolons, e.g. "AE1,AE2" or "AE2;81,8,3,8,81").
    #[arg(long, value_delimiter = ';')]
    pub arch: Vec<String>,

    /// Seeds per architecture.
    #[arg(short, long, env = "LEDGERLENS_SEED", value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seed: Vec<u64>,

    /// Concurrent training legs.
    #[arg(long)]
    pub workers: Option<usize>,

    #[command(flatten)]
    pub knobs: TrainKnobs,

    #[command(flatten)]
    pub scoring: ScoringKnobs,

    /// Top-k cutoff; defaults to the dataset's injected-anomaly count.
    #[arg(long)]
    pub k: Option<usize>,

    /// PCA retained-component grid.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,30")]
    pub pca_components: Vec<usize>,

    /// LOF neighbor-count grid.
    #[arg(long, value_delimiter = ',', default_value = "10,50")]
    pub lof_k: Vec<usize>,

    /// Output directory for sweep.json.
    #[arg(long)]
    pub out: PathBuf,
}
