//! Iterative solve of `X~ = X W1 + P X~ W2`, where `P` is `D^{-1}A` or `A`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::conditions::{check_convergence_conditions, ConvergenceReport, PropagationMode};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;

/// Lift and propagation matrices of node propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePropWeights {
    /// `d x d'` input lift.
    pub w1: Matrix,
    /// `d' x d'` propagation matrix.
    pub w2: Matrix,
    #[serde(skip)]
    feasible: bool,
}

impl NodePropWeights {
    pub fn new(w1: Matrix, w2: Matrix) -> Result<Self> {
        if !w2.is_square() {
            return Err(Error::NotSquare {
                rows: w2.rows(),
                cols: w2.cols(),
            });
        }
        if w1.cols() != w2.rows() {
            return Err(Error::DimensionMismatch(format!(
                "W1 is {}x{} but W2 is {}x{}",
                w1.rows(),
                w1.cols(),
                w2.rows(),
                w2.cols()
            )));
        }
        if !w1.is_finite() || !w2.is_finite() {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        Ok(Self {
            w1,
            w2,
            feasible: false,
        })
    }

    pub fn embedding_dim(&self) -> usize {
        self.w2.rows()
    }

    /// True once [`Self::certify`] has passed.
    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    /// Runs the convergence check and records the verdict on `self`.
    pub fn certify(&mut self, mode: PropagationMode, g: &SparseGraph) -> Result<ConvergenceReport> {
        let report = check_convergence_conditions(&self.w2, mode, g)?;
        self.feasible = report.verdict;
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm bound on the fixed-point residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Any iterate entry above this magnitude aborts the solve.
    pub overflow_limit: f64,
    /// Consecutive residual increases after which geometric growth is
    /// extrapolated; 0 disables the extrapolation.
    pub divergence_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            overflow_limit: 1e12,
            divergence_window: 20,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.overflow_limit > 0.0) {
            return Err(Error::InvalidParameter("overflow_limit must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the per-iteration residual log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub iter: usize,
    pub residual: f64,
    pub max_abs_entry: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub embedding: Matrix,
    /// Number of map evaluations performed.
    pub iterations: usize,
    /// `||X~ - F(X~)||_inf` of the returned iterate.
    pub residual: f64,
    pub log: Vec<ResidualRecord>,
}

pub fn write_residual_log<W: Write>(w: W, log: &[ResidualRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for rec in log {
        wtr.serialize(rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Iterates `H <- L + P H M` from `H = L` until the residual of the current
/// iterate drops to `cfg.tol`.
///
/// `step` computes `P H M` for the current `H`; the linear node solver and the
/// coupled edge system share this loop.
pub(crate) fn fixed_point_loop(
    input: &Matrix,
    cfg: &SolverConfig,
    mut step: impl FnMut(&Matrix) -> Matrix,
) -> Result<Solution> {
    cfg.validate()?;
    let mut h = input.clone();
    let mut log = Vec::new();
    let mut rising = 0usize;
    let mut prev_residual = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        let mut next = step(&h);
        next.add_assign(input);
        let max_abs = next.max_abs();
        let residual = next.sup_dist(&h);
        log.push(ResidualRecord {
            iter,
            residual,
            max_abs_entry: max_abs,
        });
        if !(max_abs <= cfg.overflow_limit) {
            return Err(Error::OverflowDetected {
                iteration: iter,
                max_abs,
            });
        }
        if residual <= cfg.tol {
            return Ok(Solution {
                embedding: h,
                iterations: iter,
                residual,
                log,
            });
        }
        if residual > prev_residual {
            rising += 1;
        } else {
            rising = 0;
        }
        if cfg.divergence_window > 0 && rising >= cfg.divergence_window {
            // steady geometric growth: project the magnitude to max_iter
            let rate = residual / prev_residual;
            let remaining = (cfg.max_iter - iter) as f64;
            let projected = max_abs.ln() + remaining * rate.ln();
            if projected > cfg.overflow_limit.ln() {
                return Err(Error::OverflowDetected {
                    iteration: iter,
                    max_abs,
                });
            }
        }
        prev_residual = residual;
        h = next;
    }
    let residual = log.last().map_or(f64::INFINITY, |r| r.residual);
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual,
    })
}

/// Solves `X~ = X W1 + P X~ W2` by fixed-point iteration started at `X W1`.
///
/// Fails with [`Error::OverflowDetected`] when the iterates blow past
/// `cfg.overflow_limit`, or when they grow geometrically for
/// `cfg.divergence_window` consecutive iterations at a rate that would cross
/// the limit before `max_iter`.
pub fn propagate_fixed_point(
    x: &Matrix,
    weights: &NodePropWeights,
    g: &SparseGraph,
    cfg: &SolverConfig,
    mode: PropagationMode,
) -> Result<Solution> {
    if x.rows() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows, graph has {} nodes",
            x.rows(),
            g.node_count()
        )));
    }
    let lifted = x.matmul(&weights.w1)?;
    fixed_point_loop(&lifted, cfg, |h| mode.apply(g, h).mul(&weights.w2))
}
