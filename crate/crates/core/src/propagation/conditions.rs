//! Convergence conditions on the propagation matrix and the projection that
//! restores them.
//!
//! With `A'` the vectorized propagation operator, `I - A'` is a nonsingular
//! M-matrix when `A' >= 0` and every row of `A'` sums to less than one. Both
//! reduce to conditions on the propagation matrix alone: nonnegativity, and a
//! bound on its column sums (`1` under `D^{-1}A`, `1 / max_i d_i` under `A`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;

/// Which adjacency operator the propagation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagationMode {
    /// `D^{-1} A`, the row-stochastic transition operator.
    Normalized,
    /// Raw adjacency `A`.
    Unnormalized,
}

impl PropagationMode {
    /// Applies the mode's operator to a node matrix.
    pub(crate) fn apply(self, g: &SparseGraph, m: &Matrix) -> Matrix {
        match self {
            PropagationMode::Normalized => g.transition(m),
            PropagationMode::Unnormalized => g.adjacency(m),
        }
    }

    pub(crate) fn apply_t(self, g: &SparseGraph, m: &Matrix) -> Matrix {
        match self {
            PropagationMode::Normalized => g.transition_t(m),
            PropagationMode::Unnormalized => g.adjacency_t(m),
        }
    }

    /// Upper bound the column sums must stay strictly below.
    pub fn colsum_limit(self, g: &SparseGraph) -> f64 {
        match self {
            PropagationMode::Normalized => 1.0,
            PropagationMode::Unnormalized => {
                let dmax = g.max_degree();
                if dmax > 0.0 {
                    1.0 / dmax
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub nonneg_ok: bool,
    /// `max(M^T e)`.
    pub colsum_max: f64,
    pub colsum_ok: bool,
    pub mode: PropagationMode,
    /// `1 / max_i d_i`; only meaningful in unnormalized mode.
    pub degree_bound: Option<f64>,
    pub verdict: bool,
}

impl ConvergenceReport {
    pub(crate) fn evaluate(m: &Matrix, mode: PropagationMode, limit: f64, strict_positive: bool) -> Self {
        let nonneg_ok = if strict_positive {
            m.as_slice().iter().all(|&v| v > 0.0)
        } else {
            m.as_slice().iter().all(|&v| v >= 0.0)
        };
        let colsum_max = if m.cols() == 0 {
            0.0
        } else {
            m.col_sums().into_iter().fold(f64::NEG_INFINITY, f64::max)
        };
        let colsum_ok = colsum_max < limit;
        Self {
            nonneg_ok,
            colsum_max,
            colsum_ok,
            mode,
            degree_bound: match mode {
                PropagationMode::Normalized => None,
                PropagationMode::Unnormalized => Some(limit),
            },
            verdict: nonneg_ok && colsum_ok,
        }
    }

    /// Human-readable names of the failed conditions.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.nonneg_ok {
            out.push("propagation matrix has negative entries".to_string());
        }
        if !self.colsum_ok {
            let limit = self.degree_bound.unwrap_or(1.0);
            out.push(format!(
                "max column sum {} is not below {}",
                self.colsum_max, limit
            ));
        }
        out
    }

    pub(crate) fn into_result(self) -> Result<Self> {
        if self.verdict {
            Ok(self)
        } else {
            Err(Error::Infeasible(self.violations().join("; ")))
        }
    }
}

/// Tests nonnegativity and the column-sum bound of a propagation matrix.
pub fn check_convergence_conditions(
    w2: &Matrix,
    mode: PropagationMode,
    g: &SparseGraph,
) -> Result<ConvergenceReport> {
    if !w2.is_square() {
        return Err(Error::NotSquare {
            rows: w2.rows(),
            cols: w2.cols(),
        });
    }
    Ok(ConvergenceReport::evaluate(w2, mode, mode.colsum_limit(g), false))
}

/// Clamps negative entries to zero, then rescales each column whose sum
/// exceeds `1 - margin` down to exactly that cap. Idempotent.
pub fn project_to_feasible(w2: &Matrix, margin: f64) -> Matrix {
    project_with_cap(w2, 1.0 - margin)
}

/// [`project_to_feasible`] against the column-sum bound of `mode` on `g`.
pub fn project_for_mode(w2: &Matrix, mode: PropagationMode, g: &SparseGraph, margin: f64) -> Matrix {
    match mode {
        PropagationMode::Normalized => project_with_cap(w2, 1.0 - margin),
        PropagationMode::Unnormalized => {
            let limit = mode.colsum_limit(g);
            if limit.is_finite() {
                project_with_cap(w2, (1.0 - margin) * limit)
            } else {
                w2.map(|v| v.max(0.0))
            }
        }
    }
}

fn project_with_cap(w: &Matrix, cap: f64) -> Matrix {
    let mut out = w.map(|v| v.max(0.0));
    let (rows, cols) = out.shape();
    for j in 0..cols {
        let col_sum = |m: &Matrix| (0..rows).map(|i| m.get(i, j)).sum::<f64>();
        let s = col_sum(&out);
        if s <= cap {
            continue;
        }
        let factor = cap / s;
        for i in 0..rows {
            out.set(i, j, out.get(i, j) * factor);
        }
        // rounding can leave the sum a few ulps above the cap
        let mut guard = 0;
        while col_sum(&out) > cap && guard < 64 {
            for i in 0..rows {
                out.set(i, j, out.get(i, j) * 1.0_f64.next_down());
            }
            guard += 1;
        }
    }
    out
}
