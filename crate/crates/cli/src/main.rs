//! `topcov`: file-based pipeline for evaluating topic models against
//! reference topics.

mod commands;
mod config;
mod error;
mod output;
mod pool;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topcov::analysis::Statistic;
use topcov::coverage::FeatureSet;

use crate::config::{CoherenceMeasure, CoverageMeasure, ModelKind, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "topcov", version, about = "Coverage, stability and coherence evaluation of topic models")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed used by every stage that does not set its own.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Preprocess a JSONL collection into a corpus archive.
    Ingest(IngestArgs),
    /// Train one topic model per seed.
    Train(TrainArgs),
    /// Build a reference topic set from annotated word and document lists.
    Refset(RefsetArgs),
    /// Sample topic pairs for annotation.
    Pairs(PairsArgs),
    /// Train the topic matcher on annotated pairs.
    MatcherTrain(MatcherTrainArgs),
    /// Coverage of reference topics by each model.
    Coverage(CoverageArgs),
    /// Estimate reference topic sizes with fixed-topic LDA.
    Sizes(SizesArgs),
    /// Stability of sets of model instances.
    Stability(StabilityArgs),
    /// Coherence of every model topic.
    Coherence(CoherenceArgs),
    /// Correlate two score columns with bootstrap intervals.
    Correlate(CorrelateArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// JSONL input with `id`, `title`, `text` fields.
    #[arg(long)]
    pub input: PathBuf,
    /// Archive directory to create.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub min_freq: Option<u64>,
    #[arg(long)]
    pub max_doc_frac: Option<f64>,
    #[arg(long)]
    pub min_token_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Number of topics.
    #[arg(long, short = 't')]
    pub topics: Option<usize>,
    /// Comma-separated seeds, one model each.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RefsetArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// JSONL, one reference topic per line: `words`, `docs` (input ids),
    /// `preference` (words|docs|both), optional `label` and `category`.
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PairsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub refset: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long)]
    pub per_interval: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MatcherTrainArgs {
    /// Annotated pairs CSV.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Models whose topics the annotation file refers to.
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub refset: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_feature_set)]
    pub features: Option<FeatureSet>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub refset: PathBuf,
    #[arg(long)]
    pub matcher: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub measures: Option<Vec<CoverageMeasure>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SizesArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub refset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Models whose coverage is reported per size quartile.
    #[arg(long, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub matcher: Option<PathBuf>,
    #[arg(long)]
    pub extra_topics: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    /// Instance set as `name=model1.json,model2.json,...`; repeatable.
    #[arg(long = "set", required = true)]
    pub sets: Vec<String>,
    #[arg(long)]
    pub refset: Option<PathBuf>,
    #[arg(long)]
    pub matcher: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CoherenceArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub measures: Option<Vec<CoherenceMeasure>>,
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Window sizes for NPMI, CP and CV.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub windows: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    /// First score CSV and the column to read from it.
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub x_col: String,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub y_col: String,
    /// Comma-separated join columns present in both files.
    #[arg(long, value_delimiter = ',')]
    pub key: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_statistic)]
    pub methods: Option<Vec<Statistic>>,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_feature_set(s: &str) -> Result<FeatureSet, String> {
    match s {
        "full" => Ok(FeatureSet::Full),
        "no_cosine" | "no-cosine" => Ok(FeatureSet::NoCosine),
        _ => Err(format!("unknown feature set {s:?} (full, no_cosine)")),
    }
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    match s {
        "mean" => Ok(Statistic::Mean),
        "spearman" => Ok(Statistic::Spearman),
        "pearson" => Ok(Statistic::Pearson),
        _ => Err(format!("unknown statistic {s:?} (mean, spearman, pearson)")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::new("config", e.to_string()))?;
    }
    match cli.command {
        Command::Ingest(a) => commands::ingest::run(&cfg, &a),
        Command::Train(a) => commands::train::run(&cfg, &a),
        Command::Refset(a) => commands::refset::run(&cfg, &a),
        Command::Pairs(a) => commands::pairs::run(&cfg, &a),
        Command::MatcherTrain(a) => commands::matcher::run(&cfg, &a),
        Command::Coverage(a) => commands::coverage::run(&cfg, &a),
        Command::Sizes(a) => commands::sizes::run(&cfg, &a),
        Command::Stability(a) => commands::stability::run(&cfg, &a),
        Command::Coherence(a) => commands::coherence::run(&cfg, &a),
        Command::Correlate(a) => commands::correlate::run(&cfg, &a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_owned();
            eprintln!("{}", CliError::usage(first));
            return ExitCode::FAILURE;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
