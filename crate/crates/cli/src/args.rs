use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gorenstein", version)]
#[command(
    about = "Lattice points, Hilbert functions and Gorenstein certificates for trivalent graph polytopes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count (and optionally list) lattice points at one degree
    Count(CountArgs),
    /// Hilbert function table with h* numerator and a-invariant
    Hilbert(HilbertArgs),
    /// Decide the Gorenstein property and print a certificate
    Gorenstein(GorensteinArgs),
    /// Classify a grid of signatures and write a CSV table
    Sweep(SweepArgs),
    /// Check the symmetry identities of psi over a sample grid
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Enumerate,
    Recurse,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Named graph: trinode, theta, dumbbell, loop_with_leaf, theta_with_leaf, twin_loops_with_leaf
    #[arg(long, conflicts_with_all = ["caterpillar", "g"])]
    pub named: Option<String>,
    /// Caterpillar graph given as G,N
    #[arg(long, value_name = "G,N", conflicts_with = "g")]
    pub caterpillar: Option<String>,
    /// Genus of the caterpillar graph
    #[arg(long)]
    pub g: Option<u32>,
    /// Number of leaves (defaults to the length of --leaves)
    #[arg(long)]
    pub n: Option<u32>,
    /// Level L
    #[arg(long)]
    pub level: u32,
    /// Fixed leaf weights, comma separated; the token L stands for the level
    #[arg(long, value_name = "R1,R2,..")]
    pub leaves: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Node budget per enumeration
    #[arg(long, default_value_t = 2_000_000_000)]
    pub budget: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Memo store for psi values
    #[arg(long, env = "GORENSTEIN_CACHE")]
    pub cache: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1)]
    pub degree: u32,
    /// Only interior points
    #[arg(long)]
    pub interior: bool,
    /// Print every point as a JSON line before the count
    #[arg(long)]
    pub list: bool,
    #[arg(long, value_enum, default_value = "enumerate")]
    pub method: MethodArg,
}

#[derive(Args, Debug)]
pub struct HilbertArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 12)]
    pub n_max: u32,
    #[arg(long, value_enum, default_value = "enumerate")]
    pub method: MethodArg,
}

#[derive(Args, Debug)]
pub struct GorensteinArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Degree bound of the semigroup check (default 2a + 8)
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Skip the semigroup cross-check of fast-path verdicts
    #[arg(long)]
    pub no_crosscheck: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightMode {
    /// All weights zero
    Zero,
    /// All weights equal to the level
    Level,
    /// Every nondecreasing vector with 0 < r_i < L that has a lattice point
    Generic,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Genus range, e.g. 2..3 or 2,3
    #[arg(long, default_value = "2..3")]
    pub g: String,
    /// Leaf-count range
    #[arg(long, default_value = "0")]
    pub n: String,
    /// Level range
    #[arg(long, default_value = "1..6")]
    pub level: String,
    #[arg(long, value_enum, default_value = "zero")]
    pub weights: WeightMode,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Identities to check (default: all): vacuum, permutation, factorization, flip, flip_series, graph_independence
    #[arg(long)]
    pub identity: Vec<String>,
    /// Maximum genus
    #[arg(long, default_value_t = 2)]
    pub g: u32,
    #[arg(long, default_value_t = 3)]
    pub max_leaves: u32,
    #[arg(long, default_value_t = 4)]
    pub max_level: u32,
    /// Degrees used by series identities
    #[arg(long, default_value_t = 3)]
    pub max_degree: u32,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Test hook: corrupt the count oracle
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}
