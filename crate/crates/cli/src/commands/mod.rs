mod embed;
mod experiments;
mod learn;

pub use embed::embed;
pub use experiments::{overflow, zachary};
pub use learn::{eval, generate, train};

use anyhow::{Context, Result};
use featprop::data::{generate_fraud_dataset, LabeledEdgeDataset};
use featprop::graph::AdjacencyMode;

use crate::args::DataArgs;

/// The dataset named by `--data`, or the synthetic one drawn from `seed`.
fn load_data(args: &DataArgs, seed: u64) -> Result<LabeledEdgeDataset> {
    match &args.data {
        Some(dir) => {
            let mode = if args.directed {
                AdjacencyMode::Directed
            } else {
                AdjacencyMode::Undirected
            };
            LabeledEdgeDataset::read_dir(dir, mode).with_context(|| format!("reading dataset {}", dir.display()))
        }
        None => Ok(generate_fraud_dataset(&args.gen.config(seed))?),
    }
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?)
}
