//! Sparse directed multigraph and the linear operators the propagation
//! equations are built from.
//!
//! The edge list is the ground truth: edge `e` is the `e`-th entry and keeps
//! its identity through the incidence operators `C_s` and `C_t`. The adjacency
//! `A` is derived from it in compressed-sparse-row form, with `a_ij` equal to
//! the number of parallel edges between `i` and `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// How the adjacency matrix is derived from the edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyMode {
    /// `a_ij` counts edges `i -> j`.
    Directed,
    /// `A = A_dir + A_dir^T`: every edge is a neighbor relation in both
    /// directions. Incidence operators still follow the edge direction.
    Undirected,
}

/// Endpoint selected by an incidence operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    // multiplicity of each stored entry
    count: Vec<u32>,
}

impl Csr {
    fn from_pairs(n: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> Self {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in pairs {
            buckets[i].push(j);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut count = Vec::new();
        row_ptr.push(0);
        for mut b in buckets {
            b.sort_unstable();
            let mut k = 0;
            while k < b.len() {
                let j = b[k];
                let mut c = 0u32;
                while k < b.len() && b[k] == j {
                    c += 1;
                    k += 1;
                }
                col_idx.push(j);
                count.push(c);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            row_ptr,
            col_idx,
            count,
        }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .zip(&self.count[r])
            .map(|(&j, &c)| (j, c as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    mode: AdjacencyMode,
    adj: Csr,
    out_degree: Vec<usize>,
    in_degree: Vec<usize>,
    degree: Vec<f64>,
    // edge ids grouped by source / target node
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

/// Builds a directed multigraph on `n` nodes; edge identity is list position.
pub fn build_graph(edges: &[(usize, usize)], n: usize) -> Result<SparseGraph> {
    SparseGraph::new(n, edges.to_vec(), AdjacencyMode::Directed)
}

impl SparseGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, mode: AdjacencyMode) -> Result<Self> {
        for (e, &(s, t)) in edges.iter().enumerate() {
            if s >= n || t >= n {
                return Err(Error::NodeOutOfRange {
                    edge: e,
                    source_node: s,
                    target_node: t,
                    n,
                });
            }
        }
        let adj = match mode {
            AdjacencyMode::Directed => Csr::from_pairs(n, edges.iter().copied()),
            AdjacencyMode::Undirected => Csr::from_pairs(
                n,
                edges
                    .iter()
                    .copied()
                    .chain(edges.iter().map(|&(s, t)| (t, s))),
            ),
        };
        let mut out_degree = vec![0; n];
        let mut in_degree = vec![0; n];
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (e, &(s, t)) in edges.iter().enumerate() {
            out_degree[s] += 1;
            in_degree[t] += 1;
            out_edges[s].push(e);
            in_edges[t].push(e);
        }
        let degree = (0..n).map(|i| adj.row(i).map(|(_, c)| c).sum()).collect();
        Ok(Self {
            n,
            edges,
            mode,
            adj,
            out_degree,
            in_degree,
            degree,
            out_edges,
            in_edges,
        })
    }

    pub fn undirected(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(n, edges, AdjacencyMode::Undirected)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn source(&self, e: usize) -> usize {
        self.edges[e].0
    }

    pub fn target(&self, e: usize) -> usize {
        self.edges[e].1
    }

    pub fn out_degree(&self) -> &[usize] {
        &self.out_degree
    }

    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    /// `d_i`, the row sums of `A` counted with multiplicity.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn max_degree(&self) -> f64 {
        self.degree.iter().copied().fold(0.0, f64::max)
    }

    pub fn has_isolated_nodes(&self) -> bool {
        self.degree.contains(&0.0)
    }

    /// Stored adjacency entries `(j, a_ij)` of row `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj.row(i)
    }

    /// Number of stored nonzeros of `A`.
    pub fn adjacency_nnz(&self) -> usize {
        self.adj.col_idx.len()
    }

    /// Edge ids incident to `node` on the given side.
    pub fn incident_edges(&self, side: Side, node: usize) -> &[usize] {
        match side {
            Side::Source => &self.out_edges[node],
            Side::Target => &self.in_edges[node],
        }
    }

    /// The same graph with every edge duplicated, in order.
    pub fn with_duplicated_edges(&self) -> SparseGraph {
        let edges = self.edges.iter().chain(&self.edges).copied().collect();
        SparseGraph::new(self.n, edges, self.mode).expect("indices already validated")
    }

    /// Dense `A`. Only sensible for small graphs; used by oracles and the
    /// direct solver.
    pub fn dense_adjacency(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, c) in self.neighbors(i) {
                a.set(i, j, c);
            }
        }
        a
    }

    /// Dense `T = D^{-1} A` with zero rows for isolated nodes.
    pub fn dense_transition(&self) -> Matrix {
        let mut t = self.dense_adjacency();
        for i in 0..self.n {
            let d = self.degree[i];
            if d > 0.0 {
                for v in t.row_mut(i) {
                    *v /= d;
                }
            }
        }
        t
    }

    /// `A M`.
    pub fn adjacency_apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check_node_rows(m)?;
        Ok(self.row_scaled_apply(m, |_| 1.0))
    }

    /// `A^T M`.
    pub fn adjacency_transpose_apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check_node_rows(m)?;
        Ok(self.row_scaled_transpose_apply(m, |_| 1.0))
    }

    /// `D^{-1} A M`; rows of isolated nodes are zero.
    pub fn transition_apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check_node_rows(m)?;
        Ok(self.transition(m))
    }

    /// `(D^{-1} A)^T M`.
    pub fn transition_transpose_apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check_node_rows(m)?;
        Ok(self.transition_t(m))
    }

    /// `C_s M` or `C_t M`: row `e` is the feature row of the chosen endpoint.
    pub fn incidence_apply(&self, side: Side, m: &Matrix) -> Result<Matrix> {
        self.check_node_rows(m)?;
        Ok(self.incidence(side, m))
    }

    /// `C_s^T E` or `C_t^T E`: row `j` sums the edge rows whose endpoint on
    /// `side` is `j`.
    pub fn incidence_transpose_apply(&self, side: Side, e: &Matrix) -> Result<Matrix> {
        if e.rows() != self.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "edge matrix has {} rows, graph has {} edges",
                e.rows(),
                self.edge_count()
            )));
        }
        Ok(self.incidence_t(side, e))
    }

    pub(crate) fn transition(&self, m: &Matrix) -> Matrix {
        self.row_scaled_apply(m, |i| {
            let d = self.degree[i];
            if d > 0.0 {
                1.0 / d
            } else {
                0.0
            }
        })
    }

    pub(crate) fn transition_t(&self, m: &Matrix) -> Matrix {
        self.row_scaled_transpose_apply(m, |i| {
            let d = self.degree[i];
            if d > 0.0 {
                1.0 / d
            } else {
                0.0
            }
        })
    }

    pub(crate) fn adjacency(&self, m: &Matrix) -> Matrix {
        self.row_scaled_apply(m, |_| 1.0)
    }

    pub(crate) fn adjacency_t(&self, m: &Matrix) -> Matrix {
        self.row_scaled_transpose_apply(m, |_| 1.0)
    }

    pub(crate) fn incidence(&self, side: Side, m: &Matrix) -> Matrix {
        let idx: Vec<usize> = match side {
            Side::Source => self.edges.iter().map(|e| e.0).collect(),
            Side::Target => self.edges.iter().map(|e| e.1).collect(),
        };
        m.select_rows(&idx)
    }

    pub(crate) fn incidence_t(&self, side: Side, e: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n, e.cols());
        for (id, &(s, t)) in self.edges.iter().enumerate() {
            let node = match side {
                Side::Source => s,
                Side::Target => t,
            };
            for (o, v) in out.row_mut(node).iter_mut().zip(e.row(id)) {
                *o += v;
            }
        }
        out
    }

    // diag(scale) A M
    fn row_scaled_apply(&self, m: &Matrix, scale: impl Fn(usize) -> f64) -> Matrix {
        let cols = m.cols();
        let mut out = Matrix::zeros(self.n, cols);
        for i in 0..self.n {
            let s = scale(i);
            if s == 0.0 {
                continue;
            }
            let row = out.row_mut(i);
            for (j, a) in self.adj.row(i) {
                let w = s * a;
                for (o, v) in row.iter_mut().zip(m.row(j)) {
                    *o += w * v;
                }
            }
        }
        out
    }

    // (diag(scale) A)^T M
    fn row_scaled_transpose_apply(&self, m: &Matrix, scale: impl Fn(usize) -> f64) -> Matrix {
        let cols = m.cols();
        let mut out = Matrix::zeros(self.n, cols);
        for i in 0..self.n {
            let s = scale(i);
            if s == 0.0 {
                continue;
            }
            for (j, a) in self.adj.row(i) {
                let w = s * a;
                for (o, v) in out.row_mut(j).iter_mut().zip(m.row(i)) {
                    *o += w * v;
                }
            }
        }
        out
    }

    fn check_node_rows(&self, m: &Matrix) -> Result<()> {
        if m.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "node matrix has {} rows, graph has {} nodes",
                m.rows(),
                self.n
            )));
        }
        Ok(())
    }
}
