//! Exact solve of the vectorized propagation system `(I - A') z = l`.
//!
//! With `z` the row-major vectorization of `X~` (index `s = i * d' + j`),
//! `A'[(i, j), (p, q)] = p_ip * w2_qj` where `p_ip` are the entries of the
//! propagation operator. `A'` has `(n d')^2` entries, so this path is an
//! oracle for small systems only.

use nalgebra::{DMatrix, DVector};

use super::conditions::PropagationMode;
use super::solver::NodePropWeights;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::Matrix;

/// Largest `n * d'` the dense solve will materialize.
pub const DIRECT_SOLVE_LIMIT: usize = 5000;

/// Pivot ratio below which `I - A'` is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

pub fn solve_direct_vec(
    x: &Matrix,
    weights: &NodePropWeights,
    g: &SparseGraph,
    mode: PropagationMode,
) -> Result<Matrix> {
    let n = g.node_count();
    if x.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows, graph has {n} nodes",
            x.rows()
        )));
    }
    let d = weights.embedding_dim();
    let size = n * d;
    if size > DIRECT_SOLVE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: DIRECT_SOLVE_LIMIT,
        });
    }
    let lifted = x.matmul(&weights.w1)?;
    let op = match mode {
        PropagationMode::Normalized => g.dense_transition(),
        PropagationMode::Unnormalized => g.dense_adjacency(),
    };
    let w2 = &weights.w2;

    let mut system = DMatrix::<f64>::identity(size, size);
    for i in 0..n {
        for (p, _) in g.neighbors(i) {
            let a = op.get(i, p);
            for j in 0..d {
                for q in 0..d {
                    system[(i * d + j, p * d + q)] -= a * w2.get(q, j);
                }
            }
        }
    }
    let rhs = DVector::from_column_slice(lifted.as_slice());
    let lu = system.lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    let (pmin, pmax) = (pivots.min(), pivots.max());
    if size > 0 && !(pmin > SINGULAR_PIVOT_RATIO * pmax) {
        return Err(Error::SingularSystem);
    }
    let z = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    Ok(Matrix::from_raw(n, d, z.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn edgeless_graph_returns_lift() {
        let g = build_graph(&[], 4).unwrap();
        let x = Matrix::from_fn(4, 2, |i, j| i as f64 - j as f64);
        let w = NodePropWeights::new(Matrix::from_rows(&[[1.0, 2.0], [0.5, -1.0]]).unwrap(), Matrix::scaled_identity(2, 0.7))
            .unwrap();
        let z = solve_direct_vec(&x, &w, &g, PropagationMode::Normalized).unwrap();
        assert!(z.sup_dist(&x.matmul(&w.w1).unwrap()) < 1e-14);
    }

    #[test]
    fn two_cycle_hand_solution() {
        let g = build_graph(&[(0, 1), (1, 0)], 2).unwrap();
        let x = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let w = NodePropWeights::new(Matrix::identity(1), Matrix::scaled_identity(1, 0.5)).unwrap();
        let z = solve_direct_vec(&x, &w, &g, PropagationMode::Normalized).unwrap();
        assert!((z.get(0, 0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((z.get(1, 0) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_propagation_on_cycle_is_singular() {
        // T has eigenvalue 1 and W2 = I, so I - A' has a zero eigenvalue
        let g = build_graph(&[(0, 1), (1, 2), (2, 0)], 3).unwrap();
        let x = Matrix::from_fn(3, 1, |_, _| 1.0);
        let w = NodePropWeights::new(Matrix::identity(1), Matrix::identity(1)).unwrap();
        assert!(matches!(
            solve_direct_vec(&x, &w, &g, PropagationMode::Normalized),
            Err(Error::SingularSystem)
        ));
    }

    #[test]
    fn size_guard() {
        let g = build_graph(&[], 2600).unwrap();
        let x = Matrix::zeros(2600, 1);
        let w = NodePropWeights::new(Matrix::identity(1).hconcat(&Matrix::zeros(1, 1)).unwrap(), Matrix::zeros(2, 2))
            .unwrap();
        assert!(matches!(
            solve_direct_vec(&x, &w, &g, PropagationMode::Normalized),
            Err(Error::TooLarge { size: 5200, .. })
        ));
    }
}
