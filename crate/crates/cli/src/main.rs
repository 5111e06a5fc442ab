//! `coliee`: command-line driver for the retrieval and entailment pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "coliee", version, about = "Legal case retrieval and entailment pipeline")]
struct Cli {
    /// TOML configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// -v for info, -vv for debug logging.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Retrieval,
    Entailment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Train,
    Validation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Symmetric,
    Asymmetric,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a corpus (and labels) and write a summary.
    Ingest(IngestArgs),
    /// Split topic ids into train and validation sets.
    Split(SplitArgs),
    /// Duet, SDR and bigram LMIR features for every (query, candidate) pair.
    FeaturesDuet(FeaturesDuetArgs),
    /// Train the linear duet ranker with the pairwise hinge loss.
    TrainDuet(TrainDuetArgs),
    /// Rank candidates with a duet model and select the top 5.
    RankDuet(RankDuetArgs),
    /// Keep the top-k candidates per query by bigram LMIR.
    Cascade(CascadeArgs),
    /// Paragraph-pair requests for cascade survivors, optionally toy-encoded.
    PliPairs(PliPairsArgs),
    /// Train the interaction aggregation model on an embeddings file.
    PliTrain(PliTrainArgs),
    /// Score every interaction map with a trained model.
    PliScore(PliScoreArgs),
    /// (fragment, paragraph) requests with symmetric or asymmetric truncation.
    EntailPairs(EntailPairsArgs),
    /// Classify entailment pairs with the toy encoder.
    EntailScore(EntailScoreArgs),
    /// Assemble combined features and train the pairwise SVM.
    CombineTrain(CombineTrainArgs),
    /// Apply a combined model and write a run.
    CombineApply(CombineApplyArgs),
    /// Micro precision, recall and F1 of a run.
    Evaluate(EvaluateArgs),
    /// Write synthetic retrieval and entailment corpora with planted labels.
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    #[arg(long, value_enum, default_value = "retrieval")]
    pub task: TaskArg,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the gazetteer in use (retrieval only).
    #[arg(long)]
    pub gazetteer_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    #[arg(long, value_enum, default_value = "retrieval")]
    pub task: TaskArg,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Validation fraction (overrides the config).
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct FeaturesDuetArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainDuetArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SubsetArgs {
    /// Split file restricting which queries are processed.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub subset: Subset,
}

#[derive(Args, Debug, Serialize)]
pub struct RankDuetArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Selection run (`qid<TAB>cid`).
    #[arg(long)]
    pub out: PathBuf,
    /// Full ranking (`qid<TAB>cid<TAB>rank<TAB>score`).
    #[arg(long)]
    pub ranking_out: Option<PathBuf>,
    #[command(flatten)]
    pub subset: SubsetArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CascadeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Candidates kept per query (overrides the config).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PliPairsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub cascade: PathBuf,
    /// Pair requests for an external encoder.
    #[arg(long)]
    pub out: PathBuf,
    /// Also encode every pair with the toy hash encoder into this embeddings file.
    #[arg(long)]
    pub toy_embeddings: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PliTrainArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PliScoreArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EntailPairsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EntailScoreArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Score file (`{"qid","para_idx","probs"}` per line).
    #[arg(long)]
    pub out: PathBuf,
    /// Standalone decisions as a selection run.
    #[arg(long)]
    pub decisions_out: Option<PathBuf>,
}

/// Component outputs the combined features are assembled from.
#[derive(Args, Debug, Serialize)]
pub struct CombineInputs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Retrieval: duet feature dump.
    #[arg(long)]
    pub duet_features: Option<PathBuf>,
    /// Retrieval: cascade file.
    #[arg(long)]
    pub cascade: Option<PathBuf>,
    /// Retrieval: interaction model scores.
    #[arg(long)]
    pub pli_scores: Option<PathBuf>,
    /// Retrieval: embeddings file (first-paragraph pair probabilities).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Entailment: corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Entailment: symmetric-truncation score file.
    #[arg(long)]
    pub sym_scores: Option<PathBuf>,
    /// Entailment: asymmetric-truncation score file.
    #[arg(long)]
    pub asym_scores: Option<PathBuf>,
    /// Write the assembled feature file.
    #[arg(long)]
    pub features_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CombineTrainArgs {
    #[command(flatten)]
    pub inputs: CombineInputs,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CombineApplyArgs {
    #[command(flatten)]
    pub inputs: CombineInputs,
    #[arg(long)]
    pub model: PathBuf,
    /// Selection run.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub ranking_out: Option<PathBuf>,
    #[command(flatten)]
    pub subset: SubsetArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    /// Selection run (`qid<TAB>id`).
    #[arg(long)]
    pub run: PathBuf,
    /// Labels file (retrieval or entailment).
    #[arg(long)]
    pub qrels: PathBuf,
    #[command(flatten)]
    pub subset: SubsetArgs,
    /// Metrics JSON (also printed to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenSyntheticArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub queries: usize,
    #[arg(long, default_value_t = 50)]
    pub candidates: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(p) => config::Config::load(p)?,
        None => config::Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    use commands as c;
    match &cli.command {
        Command::Ingest(a) => c::ingest(a, &cfg),
        Command::Split(a) => c::split(a, &cfg),
        Command::FeaturesDuet(a) => c::features_duet(a, &cfg),
        Command::TrainDuet(a) => c::train_duet(a, &cfg),
        Command::RankDuet(a) => c::rank_duet(a, &cfg),
        Command::Cascade(a) => c::cascade(a, &cfg),
        Command::PliPairs(a) => c::pli_pairs(a, &cfg),
        Command::PliTrain(a) => c::pli_train(a, &cfg),
        Command::PliScore(a) => c::pli_score(a, &cfg),
        Command::EntailPairs(a) => c::entail_pairs(a, &cfg),
        Command::EntailScore(a) => c::entail_score(a, &cfg),
        Command::CombineTrain(a) => c::combine_train(a, &cfg),
        Command::CombineApply(a) => c::combine_apply(a, &cfg),
        Command::Evaluate(a) => c::evaluate(a, &cfg),
        Command::GenSynthetic(a) => c::gen_synthetic(a, &cfg),
    }
}
