//! Coupled edge/node propagation on multigraphs.
//!
//! The coupled system is
//!
//! ```text
//! X~e = Xe W1 + C_s X~ W2 + C_t X~ W3
//! X~  = X W4 + D^{-1} A X~ W5 + A C_s^T X~e W6 + A C_t^T X~e W7
//! ```
//!
//! With `W6 = W7 = 0` (edge2vec) the node equation no longer sees the edges,
//! so `X~` is an ordinary node propagation with weights `(W4, W5)` and `X~e`
//! follows from it in one shot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Side, SparseGraph};
use crate::matrix::Matrix;
use crate::propagation::{
    fixed_point_loop, propagate_fixed_point, ConvergenceReport, NodePropWeights, PropagationMode, SolverConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePropWeights {
    /// `d_e x d''` edge-feature lift.
    pub w1: Matrix,
    /// `d' x d''` source-node injection.
    pub w2: Matrix,
    /// `d' x d''` target-node injection.
    pub w3: Matrix,
    /// `d x d'` node lift.
    pub w4: Matrix,
    /// `d' x d'` node propagation matrix.
    pub w5: Matrix,
    /// `d'' x d'` feedback from source-side edges (full system only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w6: Option<Matrix>,
    /// `d'' x d'` feedback from target-side edges (full system only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w7: Option<Matrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// edge2vec: `W6 = W7 = 0`.
    Reduced,
    /// Full coupled system with edge feedback into nodes.
    Full,
}

impl EdgePropWeights {
    /// Reduced (edge2vec) weights without feedback matrices.
    pub fn reduced(w1: Matrix, w2: Matrix, w3: Matrix, w4: Matrix, w5: Matrix) -> Result<Self> {
        let w = Self {
            w1,
            w2,
            w3,
            w4,
            w5,
            w6: None,
            w7: None,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn with_feedback(mut self, w6: Matrix, w7: Matrix) -> Result<Self> {
        self.w6 = Some(w6);
        self.w7 = Some(w7);
        self.validate()?;
        Ok(self)
    }

    /// `d`, `d_e`, `d'`, `d''`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.w4.rows(), self.w1.rows(), self.w5.rows(), self.w1.cols())
    }

    pub fn validate(&self) -> Result<()> {
        let node_dim = self.w5.rows();
        let edge_dim = self.w1.cols();
        let mut problems = Vec::new();
        if !self.w5.is_square() {
            problems.push(format!("W5 is {:?}, must be square", self.w5.shape()));
        }
        if self.w4.cols() != node_dim {
            problems.push(format!("W4 has {} columns, expected {node_dim}", self.w4.cols()));
        }
        for (name, m) in [("W2", &self.w2), ("W3", &self.w3)] {
            if m.shape() != (node_dim, edge_dim) {
                problems.push(format!("{name} is {:?}, expected ({node_dim}, {edge_dim})", m.shape()));
            }
        }
        for (name, m) in [("W6", &self.w6), ("W7", &self.w7)] {
            if let Some(m) = m {
                if m.shape() != (edge_dim, node_dim) {
                    problems.push(format!("{name} is {:?}, expected ({edge_dim}, {node_dim})", m.shape()));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::DimensionMismatch(problems.join("; ")));
        }
        let all_finite = self.matrices().iter().all(|(_, m)| m.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        Ok(())
    }

    /// Named weight matrices, in order, skipping absent feedback matrices.
    pub fn matrices(&self) -> Vec<(&'static str, &Matrix)> {
        let mut out = vec![
            ("w1", &self.w1),
            ("w2", &self.w2),
            ("w3", &self.w3),
            ("w4", &self.w4),
            ("w5", &self.w5),
        ];
        if let Some(m) = &self.w6 {
            out.push(("w6", m));
        }
        if let Some(m) = &self.w7 {
            out.push(("w7", m));
        }
        out
    }

    /// `W5 + W2 W6 + W2 W7`, the propagation matrix the full system is
    /// checked against.
    pub fn combined_propagation(&self) -> Matrix {
        let mut m = self.w5.clone();
        for fb in [&self.w6, &self.w7].into_iter().flatten() {
            m.add_assign(&self.w2.mul(fb));
        }
        m
    }

    fn has_feedback(&self) -> bool {
        self.w6.is_some() || self.w7.is_some()
    }
}

/// Convergence check for the reduced or full coupled system.
///
/// Reduced mode tests `W5`; full mode tests `W5 + W2 W6 + W2 W7`. With
/// `strict_positive` the sign condition requires every entry to be strictly
/// positive instead of nonnegative.
pub fn check_edge2vec_conditions(
    w: &EdgePropWeights,
    mode: CouplingMode,
    strict_positive: bool,
) -> Result<ConvergenceReport> {
    w.validate()?;
    let m = match mode {
        CouplingMode::Reduced => {
            if w.has_feedback() {
                return Err(Error::InvalidParameter(
                    "reduced mode requires W6 and W7 to be absent".into(),
                ));
            }
            w.w5.clone()
        }
        CouplingMode::Full => w.combined_propagation(),
    };
    Ok(ConvergenceReport::evaluate(
        &m,
        PropagationMode::Normalized,
        1.0,
        strict_positive,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge2vecConfig {
    pub solver: SolverConfig,
    /// Refuse to propagate when the convergence conditions fail.
    pub enforce_conditions: bool,
    pub strict_positive: bool,
}

impl Default for Edge2vecConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            enforce_conditions: true,
            strict_positive: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EdgeEmbedding {
    /// `n x d'` node embeddings.
    pub nodes: Matrix,
    /// `m x d''` edge embeddings.
    pub edges: Matrix,
    pub iterations: usize,
    pub residual: f64,
}

/// `Xe W1 + C_s X~ W2 + C_t X~ W3`.
pub fn compose_edges(xe: &Matrix, nodes: &Matrix, w: &EdgePropWeights, g: &SparseGraph) -> Result<Matrix> {
    check_inputs(nodes, xe, g)?;
    if xe.cols() != w.w1.rows() || nodes.cols() != w.w2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "edge features {:?} / node embeddings {:?} do not match W1 {:?} / W2 {:?}",
            xe.shape(),
            nodes.shape(),
            w.w1.shape(),
            w.w2.shape()
        )));
    }
    Ok(compose(xe, nodes, w, g))
}

fn compose(xe: &Matrix, nodes: &Matrix, w: &EdgePropWeights, g: &SparseGraph) -> Matrix {
    let mut out = xe.mul(&w.w1);
    out.add_assign(&g.incidence(Side::Source, nodes).mul(&w.w2));
    out.add_assign(&g.incidence(Side::Target, nodes).mul(&w.w3));
    out
}

fn check_inputs(x_rows: &Matrix, xe: &Matrix, g: &SparseGraph) -> Result<()> {
    if x_rows.rows() != g.node_count() || xe.rows() != g.edge_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} node rows and {} edge rows for a graph with {} nodes and {} edges",
            x_rows.rows(),
            xe.rows(),
            g.node_count(),
            g.edge_count()
        )));
    }
    Ok(())
}

/// Reduced edge2vec: solve the node propagation with `(W4, W5)`, then compose
/// each edge from its own features and its endpoint embeddings.
pub fn edge2vec_propagate(
    x: &Matrix,
    xe: &Matrix,
    w: &EdgePropWeights,
    g: &SparseGraph,
    cfg: &Edge2vecConfig,
) -> Result<EdgeEmbedding> {
    check_inputs(x, xe, g)?;
    let report = check_edge2vec_conditions(w, CouplingMode::Reduced, cfg.strict_positive)?;
    if cfg.enforce_conditions {
        report.into_result()?;
    }
    let node_weights = NodePropWeights::new(w.w4.clone(), w.w5.clone())?;
    let sol = propagate_fixed_point(x, &node_weights, g, &cfg.solver, PropagationMode::Normalized)?;
    let edges = compose_edges(xe, &sol.embedding, w, g)?;
    Ok(EdgeEmbedding {
        nodes: sol.embedding,
        edges,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// Full coupled system, solved as a node-level fixed point after eliminating
/// `X~e`:
///
/// ```text
/// X~ = L + D^{-1} A X~ W5 + A C_s^T E(X~) W6 + A C_t^T E(X~) W7
/// L  = X W4 + A C_s^T Xe W1 W6 + A C_t^T Xe W1 W7
/// E(X~) = C_s X~ W2 + C_t X~ W3
/// ```
///
/// The edge embeddings are then composed from the converged `X~`. Missing
/// feedback matrices are treated as zero.
pub fn full_coupled_propagate(
    x: &Matrix,
    xe: &Matrix,
    w: &EdgePropWeights,
    g: &SparseGraph,
    cfg: &Edge2vecConfig,
) -> Result<EdgeEmbedding> {
    check_inputs(x, xe, g)?;
    let report = check_edge2vec_conditions(w, CouplingMode::Full, cfg.strict_positive)?;
    if cfg.enforce_conditions {
        report.into_result()?;
    }
    if x.cols() != w.w4.rows() || xe.cols() != w.w1.rows() {
        return Err(Error::DimensionMismatch(format!(
            "features {:?} / {:?} do not match W4 {:?} / W1 {:?}",
            x.shape(),
            xe.shape(),
            w.w4.shape(),
            w.w1.shape()
        )));
    }
    let feedback = [(Side::Source, &w.w6), (Side::Target, &w.w7)];

    let mut input = x.mul(&w.w4);
    let lifted_edges = xe.mul(&w.w1);
    for (side, fb) in feedback {
        if let Some(fb) = fb {
            let gathered = g.adjacency(&g.incidence_t(side, &lifted_edges));
            input.add_assign(&gathered.mul(fb));
        }
    }

    let sol = fixed_point_loop(&input, &cfg.solver, |h| {
        let mut next = g.transition(h).mul(&w.w5);
        if w.has_feedback() {
            let mut edge_part = g.incidence(Side::Source, h).mul(&w.w2);
            edge_part.add_assign(&g.incidence(Side::Target, h).mul(&w.w3));
            for (side, fb) in feedback {
                if let Some(fb) = fb {
                    next.add_assign(&g.adjacency(&g.incidence_t(side, &edge_part)).mul(fb));
                }
            }
        }
        next
    })?;
    let edges = compose(xe, &sol.embedding, w, g);
    Ok(EdgeEmbedding {
        nodes: sol.embedding,
        edges,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_rows(&[[v]]).unwrap()
    }

    fn scalar_weights(w5: f64) -> EdgePropWeights {
        EdgePropWeights::reduced(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), scalar(w5)).unwrap()
    }

    #[test]
    fn reduced_diagonal_is_feasible() {
        let w = EdgePropWeights::reduced(
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::scaled_identity(2, 0.4),
        )
        .unwrap();
        assert!(check_edge2vec_conditions(&w, CouplingMode::Reduced, false).unwrap().verdict);
        // strictly positive reading rejects the zero off-diagonals
        assert!(!check_edge2vec_conditions(&w, CouplingMode::Reduced, true).unwrap().verdict);
    }

    #[test]
    fn full_mode_with_zero_feedback_matches_reduced() {
        let base = scalar_weights(0.7);
        let full = base.clone().with_feedback(scalar(0.0), scalar(0.0)).unwrap();
        let r = check_edge2vec_conditions(&base, CouplingMode::Reduced, false).unwrap();
        let f = check_edge2vec_conditions(&full, CouplingMode::Full, false).unwrap();
        assert_eq!(r, f);
    }

    #[test]
    fn full_mode_counts_feedback_column_sums() {
        // W2 W6 adds 0.6 to the single column: 0.5 + 0.6 = 1.1
        let w = EdgePropWeights::reduced(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.5))
            .unwrap()
            .with_feedback(scalar(0.6), scalar(0.0))
            .unwrap();
        let r = check_edge2vec_conditions(&w, CouplingMode::Full, false).unwrap();
        assert!((r.colsum_max - 1.1).abs() < 1e-15);
        assert!(!r.verdict);
    }

    #[test]
    fn reduced_mode_rejects_feedback() {
        let w = scalar_weights(0.5).with_feedback(scalar(0.1), scalar(0.1)).unwrap();
        assert!(check_edge2vec_conditions(&w, CouplingMode::Reduced, false).is_err());
    }

    #[test]
    fn single_edge_composition() {
        let g = build_graph(&[(0, 1)], 2).unwrap();
        let x = Matrix::from_rows(&[[2.0], [3.0]]).unwrap();
        let xe = Matrix::from_rows(&[[10.0]]).unwrap();
        let out = edge2vec_propagate(&x, &xe, &scalar_weights(0.0), &g, &Edge2vecConfig::default()).unwrap();
        assert_eq!(out.nodes, x);
        assert_eq!(out.edges.to_rows(), vec![vec![15.0]]);
    }

    #[test]
    fn parallel_edges_get_identical_embeddings() {
        let g = build_graph(&[(0, 1), (0, 1), (1, 0)], 2).unwrap();
        let x = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let xe = Matrix::from_rows(&[[0.5], [0.5], [2.0]]).unwrap();
        let out = edge2vec_propagate(&x, &xe, &scalar_weights(0.6), &g, &Edge2vecConfig::default()).unwrap();
        assert_eq!(out.edges.row(0), out.edges.row(1));
        assert_ne!(out.edges.row(0), out.edges.row(2));
    }

    #[test]
    fn infeasible_weights_are_refused_unless_overridden() {
        let g = build_graph(&[(0, 1), (1, 0)], 2).unwrap();
        let x = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let xe = Matrix::from_rows(&[[0.0], [0.0]]).unwrap();
        let w = scalar_weights(1.5);
        assert!(matches!(
            edge2vec_propagate(&x, &xe, &w, &g, &Edge2vecConfig::default()),
            Err(Error::Infeasible(_))
        ));
        let cfg = Edge2vecConfig {
            enforce_conditions: false,
            ..Edge2vecConfig::default()
        };
        assert!(matches!(
            edge2vec_propagate(&x, &xe, &w, &g, &cfg),
            Err(Error::OverflowDetected { .. })
        ));
    }

    #[test]
    fn dimension_errors() {
        let g = build_graph(&[(0, 1)], 2).unwrap();
        let x = Matrix::zeros(2, 1);
        let xe = Matrix::zeros(2, 1);
        assert!(edge2vec_propagate(&x, &xe, &scalar_weights(0.1), &g, &Edge2vecConfig::default()).is_err());
        assert!(EdgePropWeights::reduced(scalar(1.0), Matrix::zeros(2, 1), scalar(1.0), scalar(1.0), scalar(0.1)).is_err());
    }
}
