use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use steercert::steercrit::{ConditionKind, DEFAULT_GRID_POINTS};

#[derive(Debug, Parser)]
#[command(name = "steercert", version, about = "Non-steerability certification for lossy two-qubit states")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[arg(long, global = true, env = "STEERCERT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Run the built-in golden and domination checks.
    #[arg(long)]
    pub self_test: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Projective,
    Povm,
}

impl From<Kind> for ConditionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Projective => ConditionKind::Projective,
            Kind::Povm => ConditionKind::Povm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a state at a heralding efficiency.
    Certify(CertifyArgs),
    /// Print the canonical form of a state.
    Canonicalize(StateArgs),
    /// Check eigenvalue domination and outcome-flip reproduction over many directions.
    LhsVerify(LhsVerifyArgs),
    /// Critical efficiency below which the state is certified.
    Threshold(ThresholdArgs),
    /// Hill-climb for canonical states whose lossless-limit objective exceeds 1.
    Search(SearchArgs),
    /// Parametric tomography bootstrap of the certification objective.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Kind::Projective)]
    pub kind: Kind,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct LhsVerifyArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Random directions checked in addition to the maximizer.
    #[arg(long, default_value_t = 100)]
    pub directions: usize,
    /// Also compare a Monte Carlo estimate of the model at the maximizer.
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Total candidate-state evaluations.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    /// Lattice size of the inner direction search.
    #[arg(long, default_value_t = 1024)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["state", "counts"])))]
pub struct BootstrapArgs {
    /// Point estimate to resample from.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Measured counts; the point estimate is their reconstruction.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Worst-case efficiency at which members are certified.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Kind::Povm)]
    pub kind: Kind,
    #[arg(long, default_value_t = 200)]
    pub n_boot: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_per_setting: u64,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}
