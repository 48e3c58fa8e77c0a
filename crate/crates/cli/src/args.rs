use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "potgraph", version, about = "Potential theory on weighted graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Edge-list file "u<TAB>v<TAB>weight".
    #[arg(long, global = true, value_name = "PATH")]
    pub graph: Option<PathBuf>,
    /// Generator family: lattice:D, tree:K, path or cycle.
    #[arg(long = "gen", global = true, value_name = "FAMILY:PARAMS")]
    pub generator: Option<String>,
    /// Vertex measure: unit, file:PATH or msigma.
    #[arg(long, global = true, default_value = "unit")]
    pub m: String,
    /// Exhaustion radius schedule, strictly increasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Vec<usize>,
    /// Relative residual target of the linear solver.
    #[arg(long = "tol-solver", global = true, default_value_t = 1e-10)]
    pub tol_solver: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Emit sequences as CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Generate a family member and optionally write its edge list.
    Gen(GenArgs),
    /// Classify recurrence or transience along the radius schedule.
    Recur(RecurArgs),
    /// Capacity of a vertex set, of exhaustion tails, or at infinity.
    Capacity(CapacityArgs),
    /// Royden decomposition along an exhaustion by balls.
    Royden(RoydenArgs),
    /// Intrinsic-metric diagnostics.
    Metric(MetricArgs),
    /// Null-path witnesses.
    Paths(PathsArgs),
    /// Circle-packing contact graphs and resolvability diagnostics.
    Packing(PackingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Recur(_) => "recur",
            Command::Capacity(_) => "capacity",
            Command::Royden(_) => "royden",
            Command::Metric(_) => "metric",
            Command::Paths(_) => "paths",
            Command::Packing(_) => "packing",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    /// Size parameter; defaults to the largest radius.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// Edge-list output file.
    #[arg(long, value_name = "PATH")]
    pub edges: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RecurArgs {
    /// Seed vertex; defaults to the smallest id.
    #[arg(long)]
    pub origin: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// Skip the flow certificate for transient verdicts.
    #[arg(long)]
    pub no_flow: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CapacityArgs {
    /// Vertex set "{0,1}" or file:PATH with whitespace-separated ids.
    #[arg(long)]
    pub set: Option<String>,
    /// Tail and seed-to-ring capacities along the schedule.
    #[arg(long)]
    pub tail: bool,
    /// Upper bounds at infinity from exhaustion complements.
    #[arg(long)]
    pub infinity: bool,
    #[arg(long)]
    pub origin: Option<u64>,
    /// Potential file for the optimizer of `--set`.
    #[arg(long, value_name = "PATH")]
    pub potential_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RoydenArgs {
    /// file:PATH, const:C, random, or hop-clamp:K.
    #[arg(long = "f", default_value = "hop-clamp:2")]
    pub f: String,
    /// Hop radius of the observation window around the origin.
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub stab_tol: f64,
    #[arg(long)]
    pub origin: Option<u64>,
    /// Potential file for the harmonic part on the last truncation.
    #[arg(long, value_name = "PATH")]
    pub fh_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    Potential,
    DiscTop,
    Path,
}

#[derive(Args, Debug, Serialize)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value_t = MetricMode::Path)]
    pub mode: MetricMode,
    /// Potential file for `--mode potential`.
    #[arg(long, value_name = "PATH")]
    pub potential: Option<PathBuf>,
    /// Edge-function file for `--mode path`; unit lengths otherwise.
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PathsArgs {
    /// Potential of finite energy to build the witness from.
    #[arg(long, value_name = "PATH")]
    pub potential: Option<PathBuf>,
    /// Build the witness from a recurrent verdict on the schedule.
    #[arg(long)]
    pub yamasaki: bool,
    /// Edge weights of a tree to integrate from the origin.
    #[arg(long, value_name = "PATH")]
    pub tree_weights: Option<PathBuf>,
    #[arg(long)]
    pub origin: Option<u64>,
    /// Perturbation budget of the witness; large graphs need more than
    /// the default `1e-9 max(1, Q)`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Path file, one path of vertex ids per line.
    #[arg(long, value_name = "PATH")]
    pub paths_file: Option<PathBuf>,
    /// Axis and diagonal rays of a generated lattice.
    #[arg(long)]
    pub rays: bool,
    /// Random walks "COUNT:STEPS" from the origin.
    #[arg(long)]
    pub random: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Edge-function file for the witness (or the tree potential).
    #[arg(long, value_name = "PATH")]
    pub witness_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PackingArgs {
    /// Hexagonal packing of the unit disk with disc radius RHO.
    #[arg(long, value_name = "RHO", conflicts_with = "file")]
    pub hex: Option<f64>,
    /// Packing file "id<TAB>x<TAB>y<TAB>r".
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// circle:K or a list "(x,y),(x,y)".
    #[arg(long, default_value = "circle:8")]
    pub anchors: String,
    /// Emit the contact graph edge list only.
    #[arg(long)]
    pub contact_only: bool,
    /// Contact graph edge-list file.
    #[arg(long, value_name = "PATH")]
    pub contact_out: Option<PathBuf>,
    /// Boundary data "(x,y)=v,(x,y)=v" for a harmonic function.
    #[arg(long)]
    pub harmonic: Option<String>,
    /// Potential file for the harmonic part.
    #[arg(long, value_name = "PATH")]
    pub fh_out: Option<PathBuf>,
    /// Exhaustion levels of the harmonic construction.
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    /// Number of bump scales per anchor.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Largest bump scale.
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    /// Fixed geometric ratio; fitted to the nearest center otherwise.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub decay_ratio: f64,
    #[arg(long)]
    pub tangency_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub stab_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Report file; same as `--out`.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}
