//! Seeded buyer -> seller transaction multigraphs with planted fraud.
//!
//! A handful of sellers are fraudulent and every transaction they receive is
//! fraud. Fraud transactions come from a hidden pool of susceptible buyers,
//! who also shop normally. Nothing about a seller's own features marks it as
//! fraudulent; the signal lives in who buys from it. What each view sees:
//!
//! * edge features alone: a weak shift on fraud transactions;
//! * endpoint features: the buyer's susceptibility, a noisy per-buyer cue that
//!   also fires on the susceptible buyers' honest purchases;
//! * propagated features: the seller's neighborhood average, which is
//!   dominated by susceptible buyers only for fraud sellers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LabeledEdgeDataset, Split};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;
use crate::rng::{normal, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FraudGenConfig {
    pub n_buyers: usize,
    pub n_sellers: usize,
    pub n_edges: usize,
    pub fraud_rate: f64,
    pub n_fraud_sellers: usize,
    /// Node feature dimension.
    pub d: usize,
    /// Edge feature dimension.
    pub d_e: usize,
    /// Standard deviation of the feature noise.
    pub noise: f64,
    pub seed: u64,
    /// Share of buyers susceptible to fraud.
    pub susceptible_fraction: f64,
    /// Mean shift of the first node feature of susceptible buyers.
    pub buyer_shift: f64,
    /// Mean shift of the first edge feature of fraud transactions.
    pub edge_shift: f64,
    /// Fraction of edges assigned to the test split (stratified by class).
    pub test_fraction: f64,
}

impl Default for FraudGenConfig {
    fn default() -> Self {
        Self {
            n_buyers: 300,
            n_sellers: 100,
            n_edges: 5000,
            fraud_rate: 0.02,
            n_fraud_sellers: 10,
            d: 4,
            d_e: 4,
            noise: 1.0,
            seed: 0,
            susceptible_fraction: 0.2,
            buyer_shift: 1.0,
            edge_shift: 0.5,
            test_fraction: 0.3,
        }
    }
}

impl FraudGenConfig {
    pub fn fraud_count(&self) -> usize {
        (self.fraud_rate * self.n_edges as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.fraud_rate > 0.0 && self.fraud_rate < 1.0) {
            return bad("fraud_rate must lie in (0, 1)");
        }
        if self.n_buyers == 0 || self.n_sellers == 0 || self.n_edges == 0 || self.d == 0 || self.d_e == 0 {
            return bad("counts and dimensions must be positive");
        }
        if self.n_fraud_sellers == 0 || self.n_fraud_sellers >= self.n_sellers {
            return bad("n_fraud_sellers must be in 1..n_sellers");
        }
        if self.fraud_rate * (self.n_edges as f64) < 1.0 {
            return bad("fraud_rate * n_edges must be at least 1");
        }
        if self.fraud_count() >= self.n_edges {
            return bad("fraud_rate leaves no normal transactions");
        }
        if !(self.susceptible_fraction > 0.0 && self.susceptible_fraction <= 1.0) {
            return bad("susceptible_fraction must lie in (0, 1]");
        }
        if (self.n_buyers as f64 * self.susceptible_fraction).round() < 1.0 {
            return bad("no susceptible buyers at this fraction");
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be nonnegative");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

const STREAM_ROLES: u64 = 1;
const STREAM_EDGES: u64 = 2;
const STREAM_NODE_FEATURES: u64 = 3;
const STREAM_EDGE_FEATURES: u64 = 4;
const STREAM_SPLIT: u64 = 5;

/// Generates a labeled bipartite transaction multigraph. Nodes `0..n_buyers`
/// are buyers, the rest sellers; every edge runs buyer -> seller.
pub fn generate_fraud_dataset(cfg: &FraudGenConfig) -> Result<LabeledEdgeDataset> {
    cfg.validate()?;
    let n = cfg.n_buyers + cfg.n_sellers;

    let mut rng = stream(cfg.seed, STREAM_ROLES);
    let mut sellers: Vec<usize> = (cfg.n_buyers..n).collect();
    sellers.shuffle(&mut rng);
    let (fraud_sellers, honest_sellers) = sellers.split_at(cfg.n_fraud_sellers);
    let mut buyers: Vec<usize> = (0..cfg.n_buyers).collect();
    buyers.shuffle(&mut rng);
    let n_susceptible = (cfg.n_buyers as f64 * cfg.susceptible_fraction).round() as usize;
    let susceptible = &buyers[..n_susceptible];
    let mut is_susceptible = vec![false; n];
    for &b in susceptible {
        is_susceptible[b] = true;
    }

    // fraud edges first, then normal ones; order is shuffled afterwards
    let n_fraud = cfg.fraud_count();
    let mut rng = stream(cfg.seed, STREAM_EDGES);
    let mut edges: Vec<(usize, usize, bool)> = Vec::with_capacity(cfg.n_edges);
    for _ in 0..n_fraud {
        let b = *susceptible.choose(&mut rng).expect("nonempty");
        let s = *fraud_sellers.choose(&mut rng).expect("nonempty");
        edges.push((b, s, true));
    }
    for _ in n_fraud..cfg.n_edges {
        let b = rng.gen_range(0..cfg.n_buyers);
        let s = *honest_sellers.choose(&mut rng).expect("nonempty");
        edges.push((b, s, false));
    }
    edges.shuffle(&mut rng);

    let mut rng = stream(cfg.seed, STREAM_NODE_FEATURES);
    let x = Matrix::from_fn(n, cfg.d, |i, j| {
        let shift = if j == 0 && is_susceptible[i] { cfg.buyer_shift } else { 0.0 };
        shift + cfg.noise * normal(&mut rng)
    });

    let mut rng = stream(cfg.seed, STREAM_EDGE_FEATURES);
    let xe = Matrix::from_fn(edges.len(), cfg.d_e, |e, j| {
        let shift = if j == 0 && edges[e].2 { cfg.edge_shift } else { 0.0 };
        shift + cfg.noise * normal(&mut rng)
    });

    let labels = Matrix::from_fn(edges.len(), 2, |e, j| {
        let fraud = edges[e].2;
        if (j == 0) == fraud {
            1.0
        } else {
            0.0
        }
    });

    let mut rng = stream(cfg.seed, STREAM_SPLIT);
    let mut split = vec![Split::Train; edges.len()];
    for class in [true, false] {
        let mut ids: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].2 == class).collect();
        ids.shuffle(&mut rng);
        let n_test = ((ids.len() as f64) * cfg.test_fraction).round() as usize;
        for &e in &ids[..n_test] {
            split[e] = Split::Test;
        }
    }

    let graph = SparseGraph::undirected(n, edges.iter().map(|&(b, s, _)| (b, s)).collect())?;
    LabeledEdgeDataset::new(graph, x, xe, labels, split)
}
