//! Proximity matrices `P = sum_k w_k T^k` and the structure-only embedding
//! `X~ = P C` obtained by propagating one-hot node features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;
use crate::rng::{stream, uniform_matrix};

const STREAM_INIT: u64 = 20;

/// Weight schedule over transition powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ProximitySchedule {
    /// `w_k = alpha^k` for `k = 0..=K`.
    Geometric { alpha: f64 },
    /// `w_k = 1 - (k - 1) / K` for `k = 1..=K`.
    DeepWalk,
    /// `w_k = 1 / k` for `k = 1..=K`.
    GloVe,
}

impl ProximitySchedule {
    /// `(k, w_k)` pairs of the truncated sum.
    pub fn weights(&self, order: usize) -> Result<Vec<(usize, f64)>> {
        match *self {
            ProximitySchedule::Geometric { alpha } => {
                check_alpha(alpha)?;
                Ok((0..=order).map(|k| (k, alpha.powi(k as i32))).collect())
            }
            ProximitySchedule::DeepWalk | ProximitySchedule::GloVe if order == 0 => Err(
                Error::InvalidParameter("truncation order must be at least 1".into()),
            ),
            ProximitySchedule::DeepWalk => {
                let kk = order as f64;
                Ok((1..=order).map(|k| (k, 1.0 - (k as f64 - 1.0) / kk)).collect())
            }
            ProximitySchedule::GloVe => Ok((1..=order).map(|k| (k, 1.0 / k as f64)).collect()),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "decay alpha must lie in [0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Dense `n x n` proximity matrix truncated at `order`.
pub fn proximity_matrix(g: &SparseGraph, schedule: ProximitySchedule, order: usize) -> Result<Matrix> {
    let weights = schedule.weights(order)?;
    let n = g.node_count();
    let mut power = Matrix::identity(n);
    let mut p = Matrix::zeros(n, n);
    let mut k = 0;
    for (target, w) in weights {
        while k < target {
            power = g.transition(&power);
            k += 1;
        }
        p.axpy(w, &power);
    }
    Ok(p)
}

/// Smallest order `K` with `alpha^K <= tol`.
pub fn truncation_order(alpha: f64, tol: f64) -> usize {
    if alpha <= 0.0 {
        return 0;
    }
    (tol.ln() / alpha.ln()).ceil().max(0.0) as usize
}

/// `sum_{k=0..=order} alpha^k T^k C`, evaluated by Horner's rule
/// (`H <- C + alpha T H`) without forming `P`. With `subtract_identity` the
/// zeroth-order term is dropped, returning `X~ - C`.
pub fn structure_embedding(
    g: &SparseGraph,
    c: &Matrix,
    alpha: f64,
    order: usize,
    subtract_identity: bool,
) -> Result<Matrix> {
    check_alpha(alpha)?;
    if c.rows() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "C has {} rows, graph has {} nodes",
            c.rows(),
            g.node_count()
        )));
    }
    let mut h = c.clone();
    for _ in 0..order {
        let mut next = g.transition(&h).scale(alpha);
        next.add_assign(c);
        h = next;
    }
    if subtract_identity {
        h.axpy(-1.0, c);
    }
    Ok(h)
}

/// Seeded random `C` for [`structure_embedding`], uniform in `[0, 1)`.
pub fn random_init(n: usize, dim: usize, seed: u64) -> Matrix {
    uniform_matrix(&mut stream(seed, STREAM_INIT), n, dim, 0.0, 1.0)
}
