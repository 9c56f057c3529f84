//! `omnigraph` command-line runner.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use omnigraph::learn::KernelKind;
use omnigraph::WalkOrigin;

#[derive(Debug, Parser, Serialize)]
#[command(name = "omnigraph", version, about = "Frame-semantic graph kernels for event prediction")]
struct Cli {
    /// Seed for every random choice (splits, synthetic corpora).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to all cores. Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Build labeled instances from parses, frames, a lexicon and prices.
    Build(BuildArgs),
    /// Compute a kernel matrix over a corpus.
    Kernel(KernelArgs),
    /// LOO grid search on the training part of each split.
    Gridsearch(GridArgs),
    /// Train SVMs on the training part with a chosen configuration.
    Train(TrainArgs),
    /// Evaluate trained models on the held-out part.
    Eval(EvalArgs),
    /// Rank WL features by mutual information with the label.
    Rank(RankArgs),
    /// Generate a synthetic corpus with a planted pattern.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Wl,
    New,
    Bow,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Wl => KernelKind::Wl,
            KernelArg::New => KernelKind::New,
            KernelArg::Bow => KernelKind::Bow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OriginArg {
    Any,
    DesignatedEntity,
}

impl From<OriginArg> for WalkOrigin {
    fn from(o: OriginArg) -> Self {
        match o {
            OriginArg::Any => WalkOrigin::Any,
            OriginArg::DesignatedEntity => WalkOrigin::DesignatedEntity,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    /// CoNLL-X dependency parses, blank-line separated.
    #[arg(long)]
    pub conll: PathBuf,
    /// Frame annotations, JSON Lines aligned with the parses.
    #[arg(long)]
    pub frames: PathBuf,
    /// JSON map from entity id to surface patterns.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// A `date,close` CSV (with a single --entity) or a directory of
    /// `<entity>.csv` files.
    #[arg(long)]
    pub prices: PathBuf,
    /// Designated entities to build; all lexicon entries when omitted.
    #[arg(long)]
    pub entity: Vec<String>,
    /// Minimum absolute next-day return for a day to be kept.
    #[arg(long, default_value_t = omnigraph::ingest::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConfigArgs {
    /// WeightConfig JSON; overrides --depth and --walk-origin.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Neighborhood depth for a uniform configuration.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = OriginArg::Any)]
    pub walk_origin: OriginArg,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub kernel: KernelArg,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Also write per-pair basis reports (new) or feature maps (wl).
    #[arg(long)]
    pub explain: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub kernel: KernelArg,
    /// GridSpec JSON; the default grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// One model over all entities instead of one per entity.
    #[arg(long)]
    pub pooled: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory of a gridsearch run; supplies kernel, grouping,
    /// split and the selected configurations.
    #[arg(long, conflicts_with_all = ["config", "c", "kernel"])]
    pub grid_dir: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "grid_dir")]
    pub kernel: Option<KernelArg>,
    /// WeightConfig JSON used for every group.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub pooled: bool,
    #[arg(long, default_value_t = omnigraph::learn::grid::DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory of a train run.
    #[arg(long)]
    pub model_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Highest WL iteration to include.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// WeightConfig JSON; node and edge kinds with weight 0 are removed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    #[arg(long, default_value_t = omnigraph::analysis::DEFAULT_MIN_SUPPORT)]
    pub min_support: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0.9)]
    pub p_plus: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p_minus: f64,
    #[arg(long, default_value_t = 0.5)]
    pub positive_fraction: f64,
    #[arg(long, default_value_t = 3)]
    pub min_sentences: usize,
    #[arg(long, default_value_t = 5)]
    pub max_sentences: usize,
    #[arg(long, default_value_t = 10)]
    pub entities: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Build(a) => commands::build(&cli, a),
        Command::Kernel(a) => commands::kernel(&cli, a),
        Command::Gridsearch(a) => commands::gridsearch(&cli, a),
        Command::Train(a) => commands::train(&cli, a),
        Command::Eval(a) => commands::eval(&cli, a),
        Command::Rank(a) => commands::rank(&cli, a),
        Command::Synth(a) => commands::synth(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
