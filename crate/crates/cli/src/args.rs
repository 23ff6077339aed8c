use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cotsig", version, about = "Predict answer correctness from chain-of-thought features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate corpora and print per-benchmark and per-model statistics.
    Ingest(IngestArgs),
    /// Emit one feature row per record as CSV.
    Features(FeaturesArgs),
    /// Build the relative-accuracy lexicon and export it.
    Lexicon(LexiconArgs),
    /// Train one classifier on a benchmark (optionally one model) split.
    Train(TrainArgs),
    /// In-benchmark or cross-benchmark evaluation over seeds.
    Evaluate(EvaluateArgs),
    /// Harmful-word rule and confidence coin-flip baselines.
    Heuristics(HeuristicsArgs),
    /// Confidence calibration per (benchmark, model) set.
    Calibration(CalibrationArgs),
    /// Full run from a config file: reports, CSVs and SVG plots.
    Report(ReportArgs),
    /// Attach or score sentiment triples.
    #[command(subcommand)]
    Sentiment(SentimentCommand),
    /// Write a seeded synthetic corpus with planted signals.
    Synth(SynthArgs),
}

/// Where records come from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Corpus file as NAME=PATH or PATH (benchmark name = file stem). Repeatable;
    /// files sharing a name are pooled.
    #[arg(long = "data", short = 'd', required = true, value_name = "NAME=PATH")]
    pub data: Vec<String>,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Keep only records whose human and automatic grades agree, for these benchmarks.
    #[arg(long, value_name = "BENCHMARK")]
    pub agreement_filter: Vec<String>,
    /// Offline sentiment triples (`{record_id, sentiment}` per line).
    #[arg(long, value_name = "PATH")]
    pub sentiment: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Also write the validated records, pooled, as JSONL.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Presence,
    Count,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Word list (one token per line); default is the published harmful-word list.
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// Hedging lexicon (one cue per line).
    #[arg(long)]
    pub hedging: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "presence")]
    pub encoding: Encoding,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LexiconArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 300)]
    pub min_occurrences: usize,
    /// Count lemmas instead of surface tokens.
    #[arg(long)]
    pub lemma: bool,
    /// Bootstrap 95% intervals for every ratio.
    #[arg(long)]
    pub ci: bool,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Words listed per direction in the selection file.
    #[arg(long, default_value_t = 25)]
    pub top_k: usize,
    #[arg(long, default_value = "lexicon")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordSourceArg {
    Published,
    TrainingLexicon,
}

/// Classifier knobs shared by `train` and `evaluate`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Feature groups, comma separated: words, length, volatility, hedging.
    #[arg(long, default_value = "words", value_delimiter = ',')]
    pub features: Vec<String>,
    #[arg(long, value_enum, default_value = "published")]
    pub word_source: WordSourceArg,
    /// Word list file overriding the published list.
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// Minimum occurrences for training-lexicon words.
    #[arg(long, default_value_t = 300)]
    pub min_occurrences: usize,
    #[arg(long, default_value_t = 25)]
    pub top_k: usize,
    #[arg(long)]
    pub hedging: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_ratio: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub benchmark: String,
    /// Restrict to one model's records.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// Where to save the trained classifier (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossArg {
    Split,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Training benchmark.
    #[arg(long)]
    pub train: String,
    /// Test benchmark (same as --train for in-benchmark evaluation).
    #[arg(long)]
    pub test: String,
    /// Seeds as a list (0,1,2) or half-open range (0..30).
    #[arg(long, default_value = "0..30")]
    pub seeds: String,
    /// Cross-benchmark test set: the foreign held-out split or the whole foreign corpus.
    #[arg(long, value_enum, default_value = "split")]
    pub cross: CrossArg,
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// Per-seed cells as CSV.
    #[arg(long)]
    pub cells: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeuristicsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Harmful-word list (one token per line).
    #[arg(long)]
    pub harmful_words: Option<PathBuf>,
    /// Split seeds, as for `evaluate`.
    #[arg(long, default_value = "0..30")]
    pub seeds: String,
    #[arg(long, default_value_t = 100)]
    pub coinflip_seeds: usize,
    #[arg(long, default_value_t = 0.8)]
    pub train_ratio: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrationArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Pool each benchmark instead of splitting by model.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// TOML run file with [corpora], [features], [classifier], [heuristics], [seeds], [output].
    #[arg(long, short = 'c')]
    pub config: PathBuf,
    /// Override output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SentimentCommand {
    /// Join precomputed triples onto a corpus.
    Attach(AttachArgs),
    /// Score records through a chat-completion endpoint.
    #[cfg(feature = "http")]
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttachArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    /// Fail if any record is left without a triple.
    #[arg(long)]
    pub require_all: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(feature = "http")]
#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "https://api.openai.com/v1/chat/completions")]
    pub url: String,
    #[arg(long, default_value = "o3-mini")]
    pub model: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "SENTIMENT_API_KEY")]
    pub api_key_env: String,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Append-only cache of completed triples; reruns skip cached records.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Minimum milliseconds between request starts.
    #[arg(long, default_value_t = 0)]
    pub min_interval_ms: u64,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub records_per_set: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub accuracy: f64,
}
