//! Feature expansion over edges and its reverse-mode derivative.
//!
//! The propagating expanders are unrolled for a fixed number of steps:
//!
//! ```text
//! edge2vec:      H0 = X W4,        Ht = X W4 + T H(t-1) W5
//! structure2vec: H0 = relu(X W4),  Ht = relu(X W4 + A H(t-1) W5)
//! edges:         F  = Xe W1 + C_s H W2 + C_t H W3
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edge2vec::{edge2vec_propagate, Edge2vecConfig, EdgePropWeights};
use crate::error::{Error, Result};
use crate::graph::{Side, SparseGraph};
use crate::matrix::Matrix;
use crate::propagation::{PropagationMode, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpanderMode {
    /// The edge's own features.
    Control1,
    /// `[Xe | C_s X | C_t X]`.
    Control2,
    /// Linear propagation under the row-normalized transition matrix.
    Edge2vec,
    /// Rectified propagation under the raw adjacency (summed neighbors).
    Structure2vec,
}

impl ExpanderMode {
    pub const ALL: [ExpanderMode; 4] = [
        ExpanderMode::Control1,
        ExpanderMode::Control2,
        ExpanderMode::Edge2vec,
        ExpanderMode::Structure2vec,
    ];

    pub fn has_expander(self) -> bool {
        matches!(self, ExpanderMode::Edge2vec | ExpanderMode::Structure2vec)
    }

    /// Operator and nonlinearity of the propagating modes.
    pub fn propagation(self) -> Option<(PropagationMode, bool)> {
        match self {
            ExpanderMode::Edge2vec => Some((PropagationMode::Normalized, false)),
            ExpanderMode::Structure2vec => Some((PropagationMode::Unnormalized, true)),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExpanderMode::Control1 => "control1",
            ExpanderMode::Control2 => "control2",
            ExpanderMode::Edge2vec => "edge2vec",
            ExpanderMode::Structure2vec => "structure2vec",
        }
    }
}

impl fmt::Display for ExpanderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExpanderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExpanderMode::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown expander mode {s:?}")))
    }
}

/// How deep the propagating expanders go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    /// Fixed number of propagation steps.
    Unrolled(usize),
    /// Solve edge2vec to tolerance. Structure2vec has no fixed point to
    /// solve for and falls back to the given unroll depth.
    Converged { solver: SolverConfig, unroll_depth: usize },
}

/// Expanded edge features; `m x k`.
pub fn expand(
    mode: ExpanderMode,
    x: &Matrix,
    xe: &Matrix,
    params: Option<&EdgePropWeights>,
    g: &SparseGraph,
    depth: Depth,
) -> Result<Matrix> {
    check_shapes(mode, x, xe, params, g)?;
    match (mode, depth) {
        (ExpanderMode::Control1, _) => Ok(xe.clone()),
        (ExpanderMode::Control2, _) => Ok(control2(x, xe, g)),
        (ExpanderMode::Edge2vec, Depth::Converged { solver, .. }) => {
            let cfg = Edge2vecConfig {
                solver,
                enforce_conditions: false,
                strict_positive: false,
            };
            let w = params.expect("checked");
            Ok(edge2vec_propagate(x, xe, w, g, &cfg)?.edges)
        }
        (_, Depth::Unrolled(t)) | (_, Depth::Converged { unroll_depth: t, .. }) => {
            let w = params.expect("checked");
            Ok(forward(mode, x, xe, w, g, t).features)
        }
    }
}

fn control2(x: &Matrix, xe: &Matrix, g: &SparseGraph) -> Matrix {
    let xs = g.incidence(Side::Source, x);
    let xt = g.incidence(Side::Target, x);
    xe.hconcat(&xs)
        .and_then(|m| m.hconcat(&xt))
        .expect("row counts agree")
}

pub(crate) fn check_shapes(
    mode: ExpanderMode,
    x: &Matrix,
    xe: &Matrix,
    params: Option<&EdgePropWeights>,
    g: &SparseGraph,
) -> Result<()> {
    if x.rows() != g.node_count() || xe.rows() != g.edge_count() {
        return Err(Error::DimensionMismatch(format!(
            "X {:?} and Xe {:?} on a graph with {} nodes and {} edges",
            x.shape(),
            xe.shape(),
            g.node_count(),
            g.edge_count()
        )));
    }
    if !mode.has_expander() {
        return Ok(());
    }
    let w = params.ok_or_else(|| Error::InvalidParameter(format!("{mode} needs expander weights")))?;
    w.validate()?;
    if w.w6.is_some() || w.w7.is_some() {
        return Err(Error::InvalidParameter("expanders do not use feedback matrices".into()));
    }
    let (d, d_e, _, _) = w.dims();
    if d != x.cols() || d_e != xe.cols() {
        return Err(Error::DimensionMismatch(format!(
            "weights expect d={d}, d_e={d_e}; got X {:?}, Xe {:?}",
            x.shape(),
            xe.shape()
        )));
    }
    Ok(())
}

/// Intermediate values of an unrolled forward pass.
pub(crate) struct Forward {
    /// Pre-activations `Z0..ZT`.
    pre: Vec<Matrix>,
    /// Node states `H0..HT`.
    states: Vec<Matrix>,
    /// `P H(t-1)` for `t = 1..=T`.
    propagated: Vec<Matrix>,
    pub features: Matrix,
    /// Largest absolute entry over all states and the features.
    pub max_activation: f64,
}

pub(crate) fn forward(
    mode: ExpanderMode,
    x: &Matrix,
    xe: &Matrix,
    w: &EdgePropWeights,
    g: &SparseGraph,
    depth: usize,
) -> Forward {
    let (op, rectify) = mode.propagation().expect("propagating mode");
    let act = |z: &Matrix| if rectify { z.map(|v| v.max(0.0)) } else { z.clone() };
    let input = x.mul(&w.w4);
    let mut pre = vec![input.clone()];
    let mut states = vec![act(&input)];
    let mut propagated = Vec::with_capacity(depth);
    for _ in 0..depth {
        let p = op.apply(g, states.last().expect("nonempty"));
        let mut z = p.mul(&w.w5);
        z.add_assign(&input);
        states.push(act(&z));
        pre.push(z);
        propagated.push(p);
    }
    let h = states.last().expect("nonempty");
    let mut features = xe.mul(&w.w1);
    features.add_assign(&g.incidence(Side::Source, h).mul(&w.w2));
    features.add_assign(&g.incidence(Side::Target, h).mul(&w.w3));
    let max_activation = states
        .iter()
        .map(Matrix::max_abs)
        .fold(features.max_abs(), f64::max);
    Forward {
        pre,
        states,
        propagated,
        features,
        max_activation,
    }
}

/// Gradients of the expander matrices `[W1, W2, W3, W4, W5]` given the
/// gradient with respect to the features.
pub(crate) fn backward(
    mode: ExpanderMode,
    x: &Matrix,
    xe: &Matrix,
    w: &EdgePropWeights,
    g: &SparseGraph,
    fw: &Forward,
    g_feat: &Matrix,
) -> [Matrix; 5] {
    let (op, rectify) = mode.propagation().expect("propagating mode");
    let h = fw.states.last().expect("nonempty");
    let dw1 = xe.t_mul(g_feat);
    let dw2 = g.incidence(Side::Source, h).t_mul(g_feat);
    let dw3 = g.incidence(Side::Target, h).t_mul(g_feat);
    let mut g_h = g.incidence_t(Side::Source, &g_feat.mul_t(&w.w2));
    g_h.add_assign(&g.incidence_t(Side::Target, &g_feat.mul_t(&w.w3)));

    let mask = |g_state: Matrix, z: &Matrix| {
        if !rectify {
            return g_state;
        }
        let mut out = g_state;
        for (o, &zv) in out.as_mut_slice().iter_mut().zip(z.as_slice()) {
            if zv <= 0.0 {
                *o = 0.0;
            }
        }
        out
    };

    let mut dw4 = Matrix::zeros(w.w4.rows(), w.w4.cols());
    let mut dw5 = Matrix::zeros(w.w5.rows(), w.w5.cols());
    for t in (1..fw.states.len()).rev() {
        let g_z = mask(g_h, &fw.pre[t]);
        dw4.add_assign(&x.t_mul(&g_z));
        dw5.add_assign(&fw.propagated[t - 1].t_mul(&g_z));
        g_h = op.apply_t(g, &g_z.mul_t(&w.w5));
    }
    let g_z = mask(g_h, &fw.pre[0]);
    dw4.add_assign(&x.t_mul(&g_z));
    [dw1, dw2, dw3, dw4, dw5]
}
