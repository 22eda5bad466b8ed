use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featprop::data::FraudGenConfig;
use featprop::learning::{Batch, ExpanderMode, Projection, TrainConfig};
use featprop::propagation::SolverConfig;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "featprop", version, about = "Convergent feature propagation, edge2vec and overflow experiments")]
pub struct Cli {
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Propagate features over a graph and write the embeddings.
    Embed(EmbedArgs),
    /// Write a synthetic fraud-transaction dataset.
    Generate(GenerateArgs),
    /// Train one model and evaluate it on the test split.
    Train(TrainArgs),
    /// Evaluate a checkpoint, or train and compare several expanders.
    Eval(EvalArgs),
    /// Map where unconstrained propagation overflows over a (lambda, order) grid.
    Overflow(OverflowArgs),
    /// Structure-only embeddings of Zachary's karate club and their community separation.
    Zachary(ZacharyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    /// Linear node propagation with weights (W1, W2).
    Node,
    /// Node solve followed by edge composition.
    Edge2vec,
    /// Proximity embedding `P C` of one-hot node identities.
    Structure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Geometric,
    Deepwalk,
    Glove,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Sup-norm residual at which the fixed-point solve stops.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Magnitude at which iterates count as overflowed.
    #[arg(long, default_value_t = 1e12)]
    pub overflow_limit: f64,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            overflow_limit: self.overflow_limit,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub mode: EmbedMode,
    /// Tab-separated edge list.
    #[arg(long, conflicts_with = "zachary", required_unless_present = "zachary")]
    pub graph: Option<PathBuf>,
    /// Use the bundled karate-club graph.
    #[arg(long)]
    pub zachary: bool,
    /// Node count; defaults to one past the largest index in the edge list.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Treat every edge as a neighbor relation in both directions.
    #[arg(long)]
    pub undirected: bool,
    /// Node features CSV (node and edge2vec modes).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Edge features CSV (edge2vec mode).
    #[arg(long)]
    pub edge_features: Option<PathBuf>,
    /// Weight matrices as JSON: `{"w1": [[..]], "w2": [[..]]}` for node mode,
    /// `w1`..`w5` (optionally `w6`, `w7`) for edge2vec.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Propagate with the raw adjacency instead of `D^-1 A` (node mode).
    #[arg(long)]
    pub unnormalized: bool,
    /// Solve even when the convergence conditions fail.
    #[arg(long)]
    pub force: bool,
    /// Decay of the geometric schedule (structure mode).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Schedule::Geometric)]
    pub schedule: Schedule,
    /// Truncation order; geometric defaults to the order where alpha^K < 1e-10.
    #[arg(long)]
    pub order: Option<usize>,
    /// Embedding width of the random initialization (structure mode).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Drop the zeroth-order term, embedding `P C - C`.
    #[arg(long)]
    pub adjusted: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = FraudGenConfig::default().n_buyers)]
    pub buyers: usize,
    #[arg(long, default_value_t = FraudGenConfig::default().n_sellers)]
    pub sellers: usize,
    #[arg(long, default_value_t = FraudGenConfig::default().n_fraud_sellers)]
    pub fraud_sellers: usize,
    #[arg(long, default_value_t = FraudGenConfig::default().n_edges)]
    pub edges: usize,
    #[arg(long, default_value_t = FraudGenConfig::default().fraud_rate)]
    pub fraud_rate: f64,
    #[arg(long, default_value_t = FraudGenConfig::default().test_fraction)]
    pub test_fraction: f64,
}

impl GenArgs {
    pub fn config(&self, seed: u64) -> FraudGenConfig {
        FraudGenConfig {
            n_buyers: self.buyers,
            n_sellers: self.sellers,
            n_fraud_sellers: self.fraud_sellers,
            n_edges: self.edges,
            fraud_rate: self.fraud_rate,
            test_fraction: self.test_fraction,
            seed,
            ..FraudGenConfig::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Dataset directory as written by `generate`.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Generate the synthetic dataset in memory from `--seed`.
    #[arg(long)]
    pub synthetic: bool,
    /// Read `--data` edges as directed neighbor relations.
    #[arg(long)]
    pub directed: bool,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionArg {
    Off,
    Nonnegative,
    Feasible,
}

impl From<ProjectionArg> for Projection {
    fn from(p: ProjectionArg) -> Self {
        match p {
            ProjectionArg::Off => Projection::Off,
            ProjectionArg::Nonnegative => Projection::Nonnegative,
            ProjectionArg::Feasible => Projection::Feasible,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperArgs {
    #[arg(long, default_value_t = TrainConfig::default().lambda)]
    pub lambda: f64,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    /// Propagation steps unrolled during training.
    #[arg(long, default_value_t = TrainConfig::default().unroll_depth)]
    pub unroll: usize,
    #[arg(long, default_value_t = TrainConfig::default().node_dim)]
    pub node_dim: usize,
    #[arg(long, default_value_t = TrainConfig::default().edge_dim)]
    pub edge_dim: usize,
    /// Minibatch size; full batch when omitted.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = TrainConfig::default().projection_margin)]
    pub margin: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

impl HyperArgs {
    pub fn config(&self, seed: u64, projection: Projection) -> TrainConfig {
        TrainConfig {
            lambda: self.lambda,
            learning_rate: self.lr,
            epochs: self.epochs,
            unroll_depth: self.unroll,
            batch: self.batch_size.map_or(Batch::Full, Batch::Minibatch),
            seed,
            projection,
            projection_margin: self.margin,
            node_dim: self.node_dim,
            edge_dim: self.edge_dim,
            solver: self.solver.config(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_mode)]
    pub mode: ExpanderMode,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Constraint on the propagation matrix after each update.
    #[arg(long, value_enum, default_value_t = ProjectionArg::Feasible)]
    pub projection: ProjectionArg,
    /// Shorthand for `--projection off`.
    #[arg(long, conflicts_with = "projection")]
    pub no_projection: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl TrainArgs {
    pub fn projection(&self) -> Projection {
        if self.no_projection {
            Projection::Off
        } else {
            self.projection.into()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint written by `train`.
    #[arg(long, conflicts_with = "compare", required_unless_present = "compare")]
    pub checkpoint: Option<PathBuf>,
    /// Train and evaluate every mode in `--modes` on the same data.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "control1,control2,edge2vec")]
    pub modes: Vec<ExpanderMode>,
    /// Number of consecutive seeds, starting at `--seed`; each seed draws its
    /// own synthetic dataset and initialization.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Feasible)]
    pub projection: ProjectionArg,
    /// Worker threads for multi-seed comparisons.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OverflowArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5,1e-6")]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub orders: Vec<usize>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Keep the propagation matrix inside the convergence region.
    #[arg(long)]
    pub projection: bool,
    /// Also drop the nonnegativity clamp in the unprojected regime.
    #[arg(long, conflicts_with = "projection")]
    pub allow_negative: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; grid cells are independent.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

impl OverflowArgs {
    pub fn projection(&self) -> Projection {
        match (self.projection, self.allow_negative) {
            (true, _) => Projection::Feasible,
            (false, true) => Projection::Off,
            (false, false) => Projection::Nonnegative,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ZacharyArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.8,0.9")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Number of random initializations, seeded consecutively from `--seed`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the zeroth-order term instead of embedding `P C - C`.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> Result<ExpanderMode, String> {
    s.parse::<ExpanderMode>().map_err(|e| e.to_string())
}
