//! Labeled edge datasets: the bundled karate club graph, a synthetic fraud
//! generator, and a directory format for reading and writing datasets.
//!
//! Directory layout: `edges.tsv`, `node_features.csv`, `edge_features.csv`
//! and `labels.csv` with columns `edge,y0,y1,split`. Labels are one-hot with
//! `y0 = 1` marking a fraud (positive) edge.

mod synthetic;
mod zachary;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use synthetic::{generate_fraud_dataset, FraudGenConfig};
pub use zachary::load_zachary;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMode, SparseGraph};
use crate::io::{read_edge_list, read_features, write_edge_list, write_features};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone)]
pub struct LabeledEdgeDataset {
    pub graph: SparseGraph,
    /// Node features, `n x d`.
    pub x: Matrix,
    /// Edge features, `m x d_e`.
    pub xe: Matrix,
    /// One-hot labels, `m x 2`; column 0 is the fraud class.
    pub labels: Matrix,
    pub split: Vec<Split>,
}

impl LabeledEdgeDataset {
    pub fn new(graph: SparseGraph, x: Matrix, xe: Matrix, labels: Matrix, split: Vec<Split>) -> Result<Self> {
        let (n, m) = (graph.node_count(), graph.edge_count());
        if x.rows() != n || xe.rows() != m || labels.rows() != m || labels.cols() != 2 || split.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{n} nodes, {m} edges: X {:?}, Xe {:?}, labels {:?}, split {}",
                x.shape(),
                xe.shape(),
                labels.shape(),
                split.len()
            )));
        }
        for e in 0..m {
            let (y0, y1) = (labels.get(e, 0), labels.get(e, 1));
            let one_hot = (y0 == 1.0 && y1 == 0.0) || (y0 == 0.0 && y1 == 1.0);
            if !one_hot {
                return Err(Error::InvalidLabel { row: e, y0, y1 });
            }
        }
        Ok(Self { graph, x, xe, labels, split })
    }

    pub fn is_fraud(&self, e: usize) -> bool {
        self.labels.get(e, 0) == 1.0
    }

    pub fn fraud_count(&self) -> usize {
        (0..self.labels.rows()).filter(|&e| self.is_fraud(e)).count()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.split.len()).filter(|&e| self.split[e] == which).collect()
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_edge_list(fs::File::create(dir.join("edges.tsv"))?, self.graph.edges())?;
        write_features(fs::File::create(dir.join("node_features.csv"))?, "node", &self.x)?;
        write_features(fs::File::create(dir.join("edge_features.csv"))?, "edge", &self.xe)?;
        let mut wtr = csv::Writer::from_path(dir.join("labels.csv"))?;
        for e in 0..self.split.len() {
            wtr.serialize(LabelRecord {
                edge: e,
                y0: self.labels.get(e, 0),
                y1: self.labels.get(e, 1),
                split: self.split[e],
            })?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a dataset directory. The node count is taken from the node
    /// feature table.
    pub fn read_dir(dir: &Path, mode: AdjacencyMode) -> Result<Self> {
        let edges = read_edge_list(&dir.join("edges.tsv"))?;
        let x = read_features(&dir.join("node_features.csv"))?;
        let xe = read_features(&dir.join("edge_features.csv"))?;
        let graph = SparseGraph::new(x.rows(), edges, mode)?;

        let path = dir.join("labels.csv");
        let mut rdr = csv::Reader::from_path(&path)?;
        let mut records: Vec<LabelRecord> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        records.sort_by_key(|r| r.edge);
        if records.iter().enumerate().any(|(i, r)| r.edge != i) {
            return Err(Error::Parse {
                origin: path.display().to_string(),
                line: 0,
                message: format!("edge indices must cover 0..{} exactly", records.len()),
            });
        }
        let labels = Matrix::from_fn(records.len(), 2, |e, j| if j == 0 { records[e].y0 } else { records[e].y1 });
        let split = records.iter().map(|r| r.split).collect();
        Self::new(graph, x, xe, labels, split)
    }
}

#[derive(Serialize, Deserialize)]
struct LabelRecord {
    edge: usize,
    y0: f64,
    y1: f64,
    split: Split,
}
