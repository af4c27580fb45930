use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zhnp::analysis::SplitRatios;
use zhnp::classifier::{ModelKind, Task};

#[derive(Parser, Debug)]
#[command(name = "zhnp", version, about = "Chinese NP plurality/definiteness corpus toolkit")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train IBM Model 1 in both directions, or ingest Pharaoh alignment files
    Align(AlignArgs),
    /// Extract NP spans from both sides' trees
    Extract(ExtractArgs),
    /// Match English and Chinese NPs through both alignment directions
    Match(MatchArgs),
    /// Project labels onto matched Chinese NPs and add Chinese-side flags
    Annotate(AnnotateArgs),
    /// Label distribution, explicitness and 们-suffix statistics
    Stats(StatsArgs),
    /// Assign train/dev/test splits
    Split(SplitArgs),
    /// Train a classifier on the train split
    Train(TrainArgs),
    /// Predict labels with a trained model
    Predict(PredictArgs),
    /// Score predictions against dataset labels
    Evaluate(EvaluateArgs),
    /// Train and score one model per context size k = 0..=k-max
    ContextSweep(SweepArgs),
    /// Agreement report for human assessment records
    AssessScore(AssessArgs),
    /// Run the assessment HTTP service
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Existing English-to-Chinese links (skips training)
    #[arg(long, requires = "alignments_z2e")]
    pub alignments_e2z: Option<PathBuf>,
    /// Existing Chinese-to-English links, Chinese index first
    #[arg(long, requires = "alignments_e2z")]
    pub alignments_z2e: Option<PathBuf>,
    /// EM iterations per direction
    #[arg(long, default_value_t = 15)]
    pub iterations: usize,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// NP file written by `extract`
    #[arg(long)]
    pub nps: PathBuf,
    #[arg(long)]
    pub alignments_e2z: PathBuf,
    #[arg(long)]
    pub alignments_z2e: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Match file written by `match`
    #[arg(long)]
    pub matches: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep this fraction of sentences, chosen by hashing their ids
    #[arg(long, default_value_t = 1.0)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Possessives (my, Lisi 's) make an NP definite
    #[arg(long)]
    pub possessive_definite: bool,
    /// `word value` lines replacing the built-in English number words
    #[arg(long)]
    pub number_lexicon: Option<PathBuf>,
    /// Words ending in 们 that are not plural nouns, one per line
    #[arg(long)]
    pub men_exclusions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// JSON report path; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub men_exclusions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "8:1:1")]
    pub ratios: SplitRatios,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value = "plurality")]
    pub task: Task,
    #[arg(long, default_value = "logistic")]
    pub model_kind: ModelKind,
    /// Context sentences on each side of the target
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// N-gram orders
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub min_freq: u32,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 2.0)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use raw n-gram counts instead of unit-length vectors
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model file
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Pick the L2 strength with the best dev macro-F1 from this list
    #[arg(long, value_delimiter = ',')]
    pub l2_grid: Option<Vec<f64>>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitChoice {
    Train,
    Dev,
    Test,
    All,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitChoice,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetChoice {
    Explicit,
    Implicit,
    Both,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Prediction files; external predictions use the same line format
    #[arg(long = "predictions", alias = "import", required = true)]
    pub predictions: Vec<PathBuf>,
    /// Combine a plurality and a definiteness file into 4-way predictions
    #[arg(long)]
    pub merge_binary: bool,
    /// Also score the explicitly and/or implicitly marked NPs separately
    #[arg(long, value_enum)]
    pub subset: Option<SubsetChoice>,
    /// Add a majority-class baseline learned from the train split
    #[arg(long)]
    pub majority_baseline: bool,
    /// JSON report
    #[arg(long)]
    pub out: PathBuf,
    /// Confusion matrix CSV; defaults to the report path with a .csv extension
    #[arg(long)]
    pub confusion_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value = "test")]
    pub eval_split: SplitChoice,
    /// JSON table
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AssessArgs {
    /// Exported assessment records
    #[arg(long)]
    pub records: Vec<PathBuf>,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub sessions_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub serve_port: u16,
}
