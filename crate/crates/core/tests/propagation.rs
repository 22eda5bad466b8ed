mod common;

use common::{assert_close, cycle, nonneg_with_colsum, random_graph, rng, uniform};
use featprop::error::Error;
use featprop::graph::{build_graph, SparseGraph};
use featprop::matrix::Matrix;
use featprop::propagation::{
    check_convergence_conditions, project_for_mode, project_to_feasible, propagate_fixed_point, proximity_matrix,
    relu_propagate, solve_direct_vec, structure_embedding, NodePropWeights, PropagationMode, ProximitySchedule,
    SolverConfig,
};
use proptest::prelude::*;
use rand::Rng;

struct Instance {
    g: SparseGraph,
    x: Matrix,
    w: NodePropWeights,
    mode: PropagationMode,
}

/// Random graph with `n <= 20`, `d, d' <= 3` and a propagation matrix that
/// satisfies the convergence conditions with column sums at most 90% of the
/// bound.
fn feasible_instance(seed: u64, mode: PropagationMode) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(2..=20);
    let m = r.gen_range(0..=3 * n);
    let (d, dp) = (r.gen_range(1..=3), r.gen_range(1..=3));
    let g = random_graph(&mut r, n, m);
    let limit = mode.colsum_limit(&g).min(1.0);
    let colsum = r.gen_range(0.0..0.9) * limit;
    let w = NodePropWeights::new(uniform(&mut r, d, dp, -1.0, 1.0), nonneg_with_colsum(&mut r, dp, colsum)).unwrap();
    let x = uniform(&mut r, n, d, -2.0, 2.0);
    Instance { g, x, w, mode }
}

fn dense_operator(g: &SparseGraph, mode: PropagationMode) -> Matrix {
    match mode {
        PropagationMode::Normalized => g.dense_transition(),
        PropagationMode::Unnormalized => g.dense_adjacency(),
    }
}

/// `sum_k P^k X W1 W2^k`, summed until the terms vanish.
fn neumann(inst: &Instance) -> Matrix {
    let p = dense_operator(&inst.g, inst.mode);
    let mut term = inst.x.matmul(&inst.w.w1).unwrap();
    let mut total = term.clone();
    for _ in 0..5000 {
        term = p.matmul(&term).unwrap().matmul(&inst.w.w2).unwrap();
        total = total.add(&term).unwrap();
        if term.max_abs() < 1e-15 {
            break;
        }
    }
    total
}

fn modes() -> impl Strategy<Value = PropagationMode> {
    prop_oneof![Just(PropagationMode::Normalized), Just(PropagationMode::Unnormalized)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn iterative_matches_direct(seed in any::<u64>(), mode in modes()) {
        let inst = feasible_instance(seed, mode);
        let cfg = SolverConfig::default();
        let it = propagate_fixed_point(&inst.x, &inst.w, &inst.g, &cfg, mode).unwrap();
        let direct = solve_direct_vec(&inst.x, &inst.w, &inst.g, mode).unwrap();
        prop_assert!(it.embedding.sup_dist(&direct) <= 10.0 * cfg.tol);
    }

    #[test]
    fn direct_matches_neumann_series(seed in any::<u64>(), mode in modes()) {
        let inst = feasible_instance(seed, mode);
        let direct = solve_direct_vec(&inst.x, &inst.w, &inst.g, mode).unwrap();
        let scale = 1.0 + direct.max_abs();
        prop_assert!(direct.sup_dist(&neumann(&inst)) <= 1e-10 * scale);
    }

    #[test]
    fn residuals_contract_at_column_sum_rate(seed in any::<u64>()) {
        let inst = feasible_instance(seed, PropagationMode::Normalized);
        let rho = check_convergence_conditions(&inst.w.w2, inst.mode, &inst.g).unwrap().colsum_max;
        let sol = propagate_fixed_point(&inst.x, &inst.w, &inst.g, &SolverConfig::default(), inst.mode).unwrap();
        for pair in sol.log.windows(2) {
            let (a, b) = (pair[0].residual, pair[1].residual);
            prop_assert!(b <= rho * a + 1e-13, "residual {b:e} after {a:e} with rate {rho}");
        }
    }

    #[test]
    fn direct_solve_is_linear(seed in any::<u64>(), mode in modes()) {
        let inst = feasible_instance(seed, mode);
        let mut r = rng(seed.wrapping_add(1));
        let x2 = uniform(&mut r, inst.x.rows(), inst.x.cols(), -2.0, 2.0);
        let s1 = solve_direct_vec(&inst.x, &inst.w, &inst.g, mode).unwrap();
        let s2 = solve_direct_vec(&x2, &inst.w, &inst.g, mode).unwrap();
        let s12 = solve_direct_vec(&inst.x.add(&x2).unwrap(), &inst.w, &inst.g, mode).unwrap();
        let scale = 1.0 + s12.max_abs();
        prop_assert!(s12.sup_dist(&s1.add(&s2).unwrap()) <= 1e-12 * scale);
    }

    #[test]
    fn projection_is_idempotent_and_feasible(seed in any::<u64>(), mode in modes(), margin in 1e-4f64..0.5) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=12);
        let m = r.gen_range(1..=3 * n);
        let g = random_graph(&mut r, n, m);
        let d = r.gen_range(1..=4);
        let w = uniform(&mut r, d, d, -3.0, 3.0);
        let p = project_for_mode(&w, mode, &g, margin);
        prop_assert_eq!(&project_for_mode(&p, mode, &g, margin), &p);
        let report = check_convergence_conditions(&p, mode, &g).unwrap();
        prop_assert!(report.verdict);
        prop_assert!(report.colsum_max <= (1.0 - margin) * mode.colsum_limit(&g) * (1.0 + 1e-12));
    }

    #[test]
    fn geometric_proximity_rows_sum_to_partial_series(seed in any::<u64>(), alpha in 0.0f64..0.99, order in 0usize..8) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=10);
        // a ring keeps every node non-isolated
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((0..n).map(|_| (r.gen_range(0..n), r.gen_range(0..n))));
        let g = SparseGraph::undirected(n, edges).unwrap();
        let p = proximity_matrix(&g, ProximitySchedule::Geometric { alpha }, order).unwrap();
        let expect: f64 = (0..=order).map(|k| alpha.powi(k as i32)).sum();
        for i in 0..n {
            let s: f64 = p.row(i).iter().sum();
            prop_assert!((s - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }
}

#[test]
fn two_cycle_hand_solution() {
    let g = build_graph(&[(0, 1), (1, 0)], 2).unwrap();
    let x = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
    let w = NodePropWeights::new(Matrix::identity(1), Matrix::scaled_identity(1, 0.5)).unwrap();
    let expect = Matrix::from_rows(&[[4.0 / 3.0], [2.0 / 3.0]]).unwrap();
    let direct = solve_direct_vec(&x, &w, &g, PropagationMode::Normalized).unwrap();
    assert_close(&direct, &expect, 1e-14);
    let it = propagate_fixed_point(&x, &w, &g, &SolverConfig::default(), PropagationMode::Normalized).unwrap();
    assert_close(&it.embedding, &expect, 1e-7);
}

#[test]
fn growth_above_one_overflows_on_any_cyclic_graph() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let n = r.gen_range(3..=15);
        // every node keeps an out-edge, so the transition operator has spectral radius one
        let mut edges: Vec<(usize, usize)> = vec![(0, 1), (1, 2), (2, 0)];
        edges.extend((0..n).map(|i| (i, r.gen_range(0..n))));
        let g = build_graph(&edges, n).unwrap();
        let c = r.gen_range(1.05..2.0);
        let d = r.gen_range(1..=3);
        let w = NodePropWeights::new(Matrix::identity(d), Matrix::scaled_identity(d, c)).unwrap();
        let x = uniform(&mut r, n, d, 0.5, 1.5);
        for mode in [PropagationMode::Normalized, PropagationMode::Unnormalized] {
            let out = propagate_fixed_point(&x, &w, &g, &SolverConfig::default(), mode);
            assert!(matches!(out, Err(Error::OverflowDetected { .. })), "seed {seed}, c {c}: {out:?}");
        }
    }
}

#[test]
fn projection_restores_convergence_on_three_cycle() {
    let g = cycle(3);
    let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
    let w2 = Matrix::scaled_identity(1, 1.1);
    let cfg = SolverConfig::default();
    let w = NodePropWeights::new(Matrix::identity(1), w2.clone()).unwrap();
    assert!(matches!(
        propagate_fixed_point(&x, &w, &g, &cfg, PropagationMode::Normalized),
        Err(Error::OverflowDetected { iteration, .. }) if iteration <= 200
    ));
    // the projected rate is 0.999, so the solve needs a long budget
    let fixed = NodePropWeights::new(Matrix::identity(1), project_to_feasible(&w2, 1e-3)).unwrap();
    let long = SolverConfig {
        max_iter: 100_000,
        ..cfg
    };
    let sol = propagate_fixed_point(&x, &fixed, &g, &long, PropagationMode::Normalized);
    assert!(sol.is_ok(), "{sol:?}");
}

#[test]
fn edgeless_graph_is_input_map() {
    let g = build_graph(&[], 4).unwrap();
    let mut r = rng(3);
    let x = uniform(&mut r, 4, 2, -1.0, 1.0);
    let w = NodePropWeights::new(uniform(&mut r, 2, 3, -1.0, 1.0), nonneg_with_colsum(&mut r, 3, 0.9)).unwrap();
    let expect = x.matmul(&w.w1).unwrap();
    for mode in [PropagationMode::Normalized, PropagationMode::Unnormalized] {
        assert_close(&solve_direct_vec(&x, &w, &g, mode).unwrap(), &expect, 1e-15);
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut a = m.to_rows();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    Matrix::from_rows(&inv).unwrap()
}

#[test]
fn long_geometric_sum_approaches_resolvent() {
    let (g, _) = featprop::data::load_zachary().unwrap();
    let n = g.node_count();
    for alpha in [0.5, 0.8] {
        let t = g.dense_transition();
        let resolvent = invert(&Matrix::identity(n).sub(&t.scale(alpha)).unwrap());
        let order = featprop::propagation::truncation_order(alpha, 1e-14);
        let p = proximity_matrix(&g, ProximitySchedule::Geometric { alpha }, order).unwrap();
        assert_close(&p, &resolvent, 1e-12 / (1.0 - alpha));
        let c = Matrix::from_fn(n, 2, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0);
        let emb = structure_embedding(&g, &c, alpha, order, false).unwrap();
        assert_close(&emb, &resolvent.matmul(&c).unwrap(), 1e-11 / (1.0 - alpha));
    }
}

#[test]
fn deepwalk_and_glove_schedules() {
    let g = cycle(4);
    let t = g.dense_transition();
    let t2 = t.matmul(&t).unwrap();
    let dw = proximity_matrix(&g, ProximitySchedule::DeepWalk, 2).unwrap();
    assert_close(&dw, &t.add(&t2.scale(0.5)).unwrap(), 1e-15);
    let glove = proximity_matrix(&g, ProximitySchedule::GloVe, 2).unwrap();
    assert_close(&glove, &t.add(&t2.scale(0.5)).unwrap(), 1e-15);
    let t3 = t2.matmul(&t).unwrap();
    let glove3 = proximity_matrix(&g, ProximitySchedule::GloVe, 3).unwrap();
    assert_close(&glove3, &t.add(&t2.scale(0.5)).unwrap().add(&t3.scale(1.0 / 3.0)).unwrap(), 1e-15);
}

#[test]
fn feasible_relu_propagation_converges() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 10, 25);
        let d = 3;
        let x = uniform(&mut r, 10, 2, -1.0, 1.0);
        let w1 = uniform(&mut r, 2, d, -1.0, 1.0);
        let w3 = uniform(&mut r, 2, d, -1.0, 1.0);
        for mode in [PropagationMode::Normalized, PropagationMode::Unnormalized] {
            let w2 = nonneg_with_colsum(&mut r, d, 0.9 * mode.colsum_limit(&g).min(1.0));
            let out = relu_propagate(&x, &w1, &w2, &w3, &g, &SolverConfig::default(), mode).unwrap();
            assert!(out.converged && !out.overflowed);
            // the returned iterate is a fixed point of the rectified map
            let p = dense_operator(&g, mode);
            let pre = x
                .matmul(&w1)
                .unwrap()
                .add(&p.matmul(&out.embedding).unwrap().matmul(&w2).unwrap())
                .unwrap()
                .add(&p.matmul(&x).unwrap().matmul(&w3).unwrap())
                .unwrap();
            assert_close(&pre.map(|v| v.max(0.0)), &out.embedding, 1e-7);
        }
    }
}

#[test]
fn strong_relu_propagation_reports_overflow() {
    let g = cycle(5);
    let x = Matrix::from_fn(5, 1, |_, _| 1.0);
    let out = relu_propagate(
        &x,
        &Matrix::identity(1),
        &Matrix::scaled_identity(1, 1.5),
        &Matrix::zeros(1, 1),
        &g,
        &SolverConfig::default(),
        PropagationMode::Normalized,
    )
    .unwrap();
    assert!(out.overflowed && !out.converged);
}
