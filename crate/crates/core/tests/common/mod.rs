#![allow(dead_code)]

use featprop::graph::{build_graph, SparseGraph};
use featprop::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi))
}

/// Random directed multigraph with `m` edges over `n` nodes. Self-loops and
/// parallel edges are allowed.
pub fn random_graph(rng: &mut impl Rng, n: usize, m: usize) -> SparseGraph {
    let edges: Vec<(usize, usize)> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    build_graph(&edges, n).unwrap()
}

/// Nonnegative square matrix whose largest column sum is exactly `colsum`.
pub fn nonneg_with_colsum(rng: &mut impl Rng, d: usize, colsum: f64) -> Matrix {
    let mut w = uniform(rng, d, d, 0.0, 1.0);
    let sums = w.col_sums();
    let top = sums.iter().cloned().fold(0.0, f64::max);
    for i in 0..d {
        for j in 0..d {
            w.set(i, j, w.get(i, j) * colsum / top);
        }
    }
    w
}

pub fn cycle(n: usize) -> SparseGraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build_graph(&edges, n).unwrap()
}

pub fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
    assert_eq!(a.shape(), b.shape());
    let d = a.sup_dist(b);
    assert!(d <= tol, "sup distance {d:e} exceeds {tol:e}");
}

use featprop::data::{LabeledEdgeDataset, Split};
use featprop::edge2vec::EdgePropWeights;
use featprop::learning::{ExpanderMode, Model};

/// Small labeled multigraph with both classes present and a mixed split.
pub fn small_dataset(seed: u64, n: usize, m: usize, d: usize, de: usize) -> LabeledEdgeDataset {
    let mut r = rng(seed);
    let edges: Vec<(usize, usize)> = (0..m).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
    let g = SparseGraph::undirected(n, edges).unwrap();
    let x = uniform(&mut r, n, d, -1.0, 1.0);
    let xe = uniform(&mut r, m, de, -1.0, 1.0);
    let labels = Matrix::from_fn(m, 2, |e, j| {
        let fraud = e % 3 == 0;
        f64::from((j == 0) == fraud)
    });
    let split = (0..m).map(|e| if e % 4 == 3 { Split::Test } else { Split::Train }).collect();
    LabeledEdgeDataset::new(g, x, xe, labels, split).unwrap()
}

/// Model with every weight drawn at random, W5 nonnegative.
pub fn random_model(seed: u64, mode: ExpanderMode, d: usize, de: usize, dn: usize, dee: usize) -> Model {
    let mut r = rng(seed);
    let (expander, width) = match mode {
        ExpanderMode::Control1 => (None, de),
        ExpanderMode::Control2 => (None, de + 2 * d),
        _ => {
            let w = EdgePropWeights::reduced(
                uniform(&mut r, de, dee, -1.0, 1.0),
                uniform(&mut r, dn, dee, -1.0, 1.0),
                uniform(&mut r, dn, dee, -1.0, 1.0),
                uniform(&mut r, d, dn, -1.0, 1.0),
                uniform(&mut r, dn, dn, 0.0, 0.3),
            )
            .unwrap();
            (Some(w), dee)
        }
    };
    let head = uniform(&mut r, width, 2, -1.0, 1.0);
    let bias = uniform(&mut r, 1, 2, -0.5, 0.5);
    Model::new(mode, expander, head, bias).unwrap()
}
