//! Rectified propagation `mu = relu(X W1 + P mu W2 + P X W3)`.
//!
//! This map is iterated only; it exists to observe when a propagation matrix
//! drives the iterates to overflow, so blow-up is reported rather than raised.

use super::conditions::PropagationMode;
use super::solver::SolverConfig;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct ReluOutcome {
    pub embedding: Matrix,
    pub overflowed: bool,
    pub converged: bool,
    /// Map evaluations performed.
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn relu(m: &Matrix) -> Matrix {
    m.map(|v| v.max(0.0))
}

/// Iterates the rectified map from zero until the residual of the current
/// iterate is within `cfg.tol`, an entry exceeds `cfg.overflow_limit`, or
/// `cfg.max_iter` evaluations have run.
#[allow(clippy::too_many_arguments)]
pub fn relu_propagate(
    x: &Matrix,
    w1: &Matrix,
    w2: &Matrix,
    w3: &Matrix,
    g: &SparseGraph,
    cfg: &SolverConfig,
    mode: PropagationMode,
) -> Result<ReluOutcome> {
    cfg.validate()?;
    let n = g.node_count();
    let d = w2.rows();
    if x.rows() != n
        || w1.rows() != x.cols()
        || w3.rows() != x.cols()
        || w1.cols() != d
        || w3.cols() != d
        || !w2.is_square()
    {
        return Err(Error::DimensionMismatch(format!(
            "X {:?}, W1 {:?}, W2 {:?}, W3 {:?} on {n} nodes",
            x.shape(),
            w1.shape(),
            w2.shape(),
            w3.shape()
        )));
    }
    let mut input = x.mul(w1);
    input.add_assign(&mode.apply(g, x).mul(w3));

    let mut mu = Matrix::zeros(n, d);
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        let mut pre = mode.apply(g, &mu).mul(w2);
        pre.add_assign(&input);
        let next = relu(&pre);
        residual = next.sup_dist(&mu);
        if !(next.max_abs() <= cfg.overflow_limit) {
            return Ok(ReluOutcome {
                embedding: next,
                overflowed: true,
                converged: false,
                iterations: iter,
                residual,
            });
        }
        if residual <= cfg.tol {
            return Ok(ReluOutcome {
                embedding: mu,
                overflowed: false,
                converged: true,
                iterations: iter,
                residual,
            });
        }
        mu = next;
    }
    Ok(ReluOutcome {
        embedding: mu,
        overflowed: false,
        converged: false,
        iterations: cfg.max_iter,
        residual,
    })
}
