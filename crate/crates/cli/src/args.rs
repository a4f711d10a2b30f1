use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use ftforge_core::dataset::DEFAULT_COMPLETE_CAP;
use ftforge_core::moea::DEFAULT_OFFSPRING_FACTOR;
use ftforge_core::tree::DEFAULT_PRODUCT_CAP;
use ftforge_core::MofSetup;

#[derive(Debug, Parser)]
#[command(name = "ftforge", version, about = "Infer fault trees from binary failure data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a failure dataset from a fault tree.
    Generate(GenerateArgs),
    /// Print the minimal cut sets contained in a dataset.
    Mcs(McsArgs),
    /// Search for a fault tree that explains a dataset.
    Infer(InferArgs),
    /// Score a fault tree against a dataset.
    Eval(EvalArgs),
    /// Run a sweep of inference runs described by a TOML file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuperfluousArg {
    /// Every row under every pattern of the new columns.
    Cross,
    /// Fair coin flips per data point.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParentsArg {
    /// An Or and an And over all basic events.
    A,
    /// The disjunctive normal form of the data's cut sets.
    B,
    /// A tree read from --parent-ft.
    C,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("tree").required(true).args(["case", "ft"])))]
pub struct GenerateArgs {
    /// Embedded case study (csd).
    #[arg(long)]
    pub case: Option<String>,
    /// Fault tree file.
    #[arg(long)]
    pub ft: Option<PathBuf>,
    /// Output CSV.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Number of Monte Carlo data points.
    #[arg(short = 'n', long = "points", required_unless_present = "complete", conflicts_with = "complete")]
    pub points: Option<u64>,
    /// Failure probability: one value for every event, or one per event.
    #[arg(short = 'p', long = "prob", value_delimiter = ',', default_value = "0.5")]
    pub prob: Vec<f64>,
    /// Produce every assignment of the basic events.
    #[arg(long)]
    pub complete: bool,
    /// With --complete, draw at random until every assignment was seen.
    #[arg(long, requires = "complete")]
    pub sampled: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append this many columns that do not affect the top event.
    #[arg(long, default_value_t = 0)]
    pub superfluous: usize,
    #[arg(long, value_enum, default_value = "cross")]
    pub superfluous_mode: SuperfluousArg,
    /// Largest event count allowed with --complete.
    #[arg(long, default_value_t = DEFAULT_COMPLETE_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct McsArgs {
    /// Dataset CSV.
    pub data: PathBuf,
    /// Also write the cut sets as a 0/1 matrix CSV.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["data", "case"])))]
pub struct InferArgs {
    /// Dataset CSV.
    pub data: Option<PathBuf>,
    /// Use the complete dataset of an embedded case study instead.
    #[arg(long)]
    pub case: Option<String>,
    /// Active objectives: sdc, dc, sc, sd, c or d.
    #[arg(long, default_value = "sdc")]
    pub mof: MofSetup,
    /// Population size.
    #[arg(long, default_value_t = 400)]
    pub ps: usize,
    /// Maximum number of generations.
    #[arg(long, default_value_t = 100)]
    pub ng: usize,
    /// Stop after this many generations with an unchanged best tree.
    #[arg(long, default_value_t = 20)]
    pub uc: usize,
    #[arg(long, value_enum, ignore_case = true, default_value = "a")]
    pub parents: ParentsArg,
    /// Initial tree for --parents c.
    #[arg(long, required_if_eq("parents", "c"))]
    pub parent_ft: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Product limit when expanding a tree into cut sets.
    #[arg(long, default_value_t = DEFAULT_PRODUCT_CAP)]
    pub dnf_cap: usize,
    /// Keep structurally identical trees in the population.
    #[arg(long)]
    pub allow_duplicates: bool,
    /// Seven operator weights: g_create, g_mutate, g_delete, be_disconnect,
    /// be_connect, be_swap, crossover.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Offspring per generation as a multiple of the population size.
    #[arg(long, default_value_t = DEFAULT_OFFSPRING_FACTOR)]
    pub offspring_factor: usize,
    /// Record wall-clock times in the output files.
    #[arg(long)]
    pub timings: bool,
    /// Print one line per generation to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fault tree file.
    pub ft: PathBuf,
    /// Dataset CSV.
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment description (TOML).
    pub spec: PathBuf,
    /// Overrides the spec's output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Discard an existing results.csv instead of resuming it.
    #[arg(long)]
    pub fresh: bool,
}
