mod common;

use common::{assert_close, rng, uniform};
use featprop::graph::{AdjacencyMode, Side, SparseGraph};
use featprop::matrix::Matrix;
use proptest::prelude::*;
use rand::Rng;

/// Dense `A` built straight from the edge list.
fn dense_a(n: usize, edges: &[(usize, usize)], mode: AdjacencyMode) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for &(s, t) in edges {
        a.set(s, t, a.get(s, t) + 1.0);
        if mode == AdjacencyMode::Undirected {
            a.set(t, s, a.get(t, s) + 1.0);
        }
    }
    a
}

fn dense_c(n: usize, edges: &[(usize, usize)], side: Side) -> Matrix {
    let mut c = Matrix::zeros(edges.len(), n);
    for (e, &(s, t)) in edges.iter().enumerate() {
        c.set(e, if side == Side::Source { s } else { t }, 1.0);
    }
    c
}

fn dense_t(a: &Matrix) -> Matrix {
    let n = a.rows();
    Matrix::from_fn(n, n, |i, j| {
        let d: f64 = a.row(i).iter().sum();
        if d > 0.0 {
            a.get(i, j) / d
        } else {
            0.0
        }
    })
}

fn instance(seed: u64, undirected: bool) -> (usize, Vec<(usize, usize)>, SparseGraph, AdjacencyMode) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=12);
    let m = r.gen_range(0..=3 * n);
    let edges: Vec<(usize, usize)> = (0..m).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
    let mode = if undirected {
        AdjacencyMode::Undirected
    } else {
        AdjacencyMode::Directed
    };
    let g = SparseGraph::new(n, edges.clone(), mode).unwrap();
    (n, edges, g, mode)
}

proptest! {
    #[test]
    fn sparse_operators_match_dense(seed in any::<u64>(), undirected in any::<bool>(), k in 1usize..4) {
        let (n, edges, g, mode) = instance(seed, undirected);
        let mut r = rng(seed ^ 0x5eed);
        let m = uniform(&mut r, n, k, -1.0, 1.0);
        let e = uniform(&mut r, edges.len(), k, -1.0, 1.0);
        let a = dense_a(n, &edges, mode);
        let t = dense_t(&a);

        assert_close(&g.dense_adjacency(), &a, 0.0);
        assert_close(&g.adjacency_apply(&m).unwrap(), &a.matmul(&m).unwrap(), 1e-12);
        assert_close(&g.adjacency_transpose_apply(&m).unwrap(), &a.transpose().matmul(&m).unwrap(), 1e-12);
        assert_close(&g.transition_apply(&m).unwrap(), &t.matmul(&m).unwrap(), 1e-12);
        assert_close(&g.transition_transpose_apply(&m).unwrap(), &t.transpose().matmul(&m).unwrap(), 1e-12);
        for side in [Side::Source, Side::Target] {
            let c = dense_c(n, &edges, side);
            assert_close(&g.incidence_apply(side, &m).unwrap(), &c.matmul(&m).unwrap(), 0.0);
            assert_close(&g.incidence_transpose_apply(side, &e).unwrap(), &c.transpose().matmul(&e).unwrap(), 1e-12);
        }
        let degree: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
        prop_assert_eq!(g.degree(), &degree[..]);
    }

    #[test]
    fn transition_rows_are_stochastic(seed in any::<u64>(), undirected in any::<bool>()) {
        let (n, _, g, _) = instance(seed, undirected);
        let ones = Matrix::from_fn(n, 1, |_, _| 1.0);
        let t1 = g.transition_apply(&ones).unwrap();
        for i in 0..n {
            let expect = if g.degree()[i] > 0.0 { 1.0 } else { 0.0 };
            prop_assert!((t1.get(i, 0) - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn parallel_edges_accumulate() {
    let g = SparseGraph::new(2, vec![(0, 1), (0, 1), (1, 0)], AdjacencyMode::Directed).unwrap();
    assert_eq!(g.dense_adjacency().to_rows(), vec![vec![0.0, 2.0], vec![1.0, 0.0]]);
    assert_eq!(g.incident_edges(Side::Source, 0), &[0, 1]);
    assert_eq!(g.incident_edges(Side::Target, 0), &[2]);
}

#[test]
fn out_of_range_edge_rejected() {
    assert!(SparseGraph::new(2, vec![(0, 2)], AdjacencyMode::Directed).is_err());
}

#[test]
fn source_incidence_gram_is_out_degree() {
    for seed in 0..20 {
        let (n, edges, g, _) = instance(seed, seed % 2 == 0);
        let m = uniform(&mut rng(seed + 1), n, 2, -1.0, 1.0);
        let round = g.incidence_transpose_apply(Side::Source, &g.incidence_apply(Side::Source, &m).unwrap()).unwrap();
        let mut outdeg = vec![0.0; n];
        for &(s, _) in &edges {
            outdeg[s] += 1.0;
        }
        let expect = Matrix::from_fn(n, 2, |i, j| outdeg[i] * m.get(i, j));
        assert_close(&round, &expect, 1e-12);
    }
}

#[test]
fn duplicating_edges_doubles_adjacency() {
    for seed in 0..20 {
        let (n, _, g, _) = instance(seed, seed % 2 == 1);
        let m = uniform(&mut rng(seed + 2), n, 3, -1.0, 1.0);
        let once = g.adjacency_apply(&m).unwrap();
        let twice = g.with_duplicated_edges().adjacency_apply(&m).unwrap();
        assert_eq!(twice, once.scale(2.0));
        // the transition operator is unchanged by uniform duplication
        assert_close(&g.with_duplicated_edges().transition_apply(&m).unwrap(), &g.transition_apply(&m).unwrap(), 1e-15);
    }
}

#[test]
fn adjacency_is_linear() {
    let (n, _, g, _) = instance(11, true);
    let mut r = rng(12);
    let (m1, m2) = (uniform(&mut r, n, 2, -1.0, 1.0), uniform(&mut r, n, 2, -1.0, 1.0));
    let lhs = g.adjacency_apply(&m1.scale(2.5).add(&m2.scale(-0.75)).unwrap()).unwrap();
    let rhs = g.adjacency_apply(&m1).unwrap().scale(2.5).add(&g.adjacency_apply(&m2).unwrap().scale(-0.75)).unwrap();
    assert_close(&lhs, &rhs, 1e-12);
}
