use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sparse_edge::edge_stats::Centering;
use sparse_edge::ensembles::EnsembleKind;
use sparse_edge::refined_law::SolveMode;

#[derive(Debug, Parser)]
#[command(name = "sparse-edge", version, about = "Refined edge law and edge statistics of sparse random matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Density of the refined law on a symmetric energy grid.
    Density(DensityArgs),
    /// Edge L and τ of the refined law.
    Edge(CommonArgs),
    /// Empirical Stieltjes transform against the refined law on an (E, η) grid.
    LocalLaw(LocalLawArgs),
    /// Rescaled extremal eigenvalues and a KS test against GOE.
    Tw(TwArgs),
    /// Edge trajectory along the Dyson flow.
    Flow(FlowArgs),
    /// Community-detection statistic from the second adjacency eigenvalue.
    Community(CommunityArgs),
    /// GOE reference sample for the Tracy–Widom law.
    BuildReference(CommonArgs),
    /// Exact-identity checks.
    Selftest(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::Edge(_) => "edge",
            Command::LocalLaw(_) => "local-law",
            Command::Tw(_) => "tw",
            Command::Flow(_) => "flow",
            Command::Community(_) => "community",
            Command::BuildReference(_) => "build-reference",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Density(a) => &a.common,
            Command::LocalLaw(a) => &a.common,
            Command::Tw(a) => &a.common,
            Command::Flow(a) => &a.common,
            Command::Community(a) => &a.common,
            Command::Edge(c) | Command::BuildReference(c) | Command::Selftest(c) => c,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Matrix dimension N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Sparsity parameter (q² = N p).
    #[arg(long)]
    pub q: Option<f64>,
    /// Fourth normalized cumulant (defaults to the centered Erdős–Rényi value at --p).
    #[arg(long)]
    pub s4: Option<f64>,
    /// Flow time.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Master seed; required by every random command.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory for CSV files and meta.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Eigenvalue index, 1 = largest.
    #[arg(long, default_value_t = 1)]
    pub which: usize,
    /// Centering of rescaled eigenvalues (tw: shifted, community: adjacency).
    #[arg(long, value_enum)]
    pub center: Option<CenterArg>,
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Number of grid points.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    /// Grid covers [-emax, emax].
    #[arg(long, default_value_t = 2.5)]
    pub emax: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LocalLawArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = KindArg::CenteredEr)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 50)]
    pub e_points: usize,
    #[arg(long, default_value_t = 20)]
    pub eta_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TwArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = KindArg::CenteredEr)]
    pub kind: KindArg,
    /// Reference file from build-reference; without it a GOE sample of the
    /// same size is drawn with master seed `seed + 1`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FlowArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Also scan the local law of H_t along the path (needs --n, --p, --seed).
    #[arg(long)]
    pub local_law: bool,
    #[arg(long, default_value_t = 20)]
    pub e_points: usize,
    #[arg(long, default_value_t = 10)]
    pub eta_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommunityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Edge list; without it a G(N, p) graph is drawn from --seed.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Reference file from build-reference.
    #[arg(long)]
    pub reference: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterArg {
    Shifted,
    Unshifted,
    Adjacency,
    AdjacencyMinus,
}

impl CenterArg {
    pub fn centering(self) -> Centering {
        match self {
            CenterArg::Shifted => Centering::ShiftedL,
            CenterArg::Unshifted => Centering::Unshifted2,
            CenterArg::Adjacency => Centering::AdjacencyLPlusA,
            CenterArg::AdjacencyMinus => Centering::AdjacencyLMinusA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Strict,
    Permissive,
}

impl ModeArg {
    pub fn mode(self) -> SolveMode {
        match self {
            ModeArg::Strict => SolveMode::Strict,
            ModeArg::Permissive => SolveMode::Permissive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    CenteredEr,
    Adjacency,
    DilutedWigner,
    SparseGeneric,
    Goe,
    Flow,
}

impl KindArg {
    pub fn kind(self) -> EnsembleKind {
        match self {
            KindArg::CenteredEr => EnsembleKind::CenteredEr,
            KindArg::Adjacency => EnsembleKind::Adjacency,
            KindArg::DilutedWigner => EnsembleKind::DilutedWigner,
            KindArg::SparseGeneric => EnsembleKind::SparseGeneric,
            KindArg::Goe => EnsembleKind::GoeZeroDiag,
            KindArg::Flow => EnsembleKind::Flow,
        }
    }
}
