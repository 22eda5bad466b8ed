use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use featprop::data::load_zachary;
use featprop::edge2vec::{
    check_edge2vec_conditions, edge2vec_propagate, full_coupled_propagate, CouplingMode, Edge2vecConfig,
    EdgePropWeights,
};
use featprop::error::Error;
use featprop::graph::{AdjacencyMode, SparseGraph};
use featprop::io::{read_edge_list, read_features, write_features};
use featprop::matrix::Matrix;
use featprop::propagation::{
    check_convergence_conditions, propagate_fixed_point, proximity_matrix, random_init, structure_embedding,
    truncation_order, write_residual_log, NodePropWeights, PropagationMode, ProximitySchedule,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Cli, EmbedArgs, EmbedMode, Schedule};
use crate::output::OutDir;

#[derive(Deserialize)]
struct NodeWeightsFile {
    w1: Matrix,
    w2: Matrix,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    conditions: &'a T,
    violations: Vec<String>,
    iterations: Option<usize>,
    residual: Option<f64>,
}

pub fn embed(cli: &Cli, a: &EmbedArgs) -> Result<()> {
    let g = load_graph(a)?;
    let out = OutDir::create(&a.out, cli)?;
    match a.mode {
        EmbedMode::Structure => structure(a, &g, &out),
        EmbedMode::Node => node(a, &g, &out),
        EmbedMode::Edge2vec => edge(a, &g, &out),
    }
}

fn load_graph(a: &EmbedArgs) -> Result<SparseGraph> {
    if a.zachary {
        return Ok(load_zachary()?.0);
    }
    let path = a.graph.as_deref().expect("clap requires --graph or --zachary");
    let edges = read_edge_list(path).with_context(|| format!("reading {}", path.display()))?;
    let n = a
        .nodes
        .unwrap_or_else(|| edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0));
    let mode = if a.undirected {
        AdjacencyMode::Undirected
    } else {
        AdjacencyMode::Directed
    };
    Ok(SparseGraph::new(n, edges, mode)?)
}

fn features(path: Option<&Path>, flag: &str) -> Result<Matrix> {
    let Some(path) = path else {
        bail!("this mode needs {flag}");
    };
    read_features(path).with_context(|| format!("reading {}", path.display()))
}

fn weights<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        bail!("this mode needs --weights");
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let w = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(w)
}

fn structure(a: &EmbedArgs, g: &SparseGraph, out: &OutDir) -> Result<()> {
    let c = random_init(g.node_count(), a.dim, a.seed);
    let (embedding, order) = match a.schedule {
        Schedule::Geometric => {
            let order = a.order.unwrap_or_else(|| truncation_order(a.alpha, 1e-10));
            (structure_embedding(g, &c, a.alpha, order, a.adjusted)?, order)
        }
        Schedule::Deepwalk | Schedule::Glove => {
            if a.adjusted {
                bail!("--adjusted only applies to the geometric schedule, which has a zeroth-order term");
            }
            let schedule = match a.schedule {
                Schedule::Deepwalk => ProximitySchedule::DeepWalk,
                _ => ProximitySchedule::GloVe,
            };
            let order = a.order.unwrap_or(10);
            (proximity_matrix(g, schedule, order)?.matmul(&c)?, order)
        }
    };
    write_features(out.file("embedding.csv")?, "node", &embedding)?;
    out.write_json(
        "report.json",
        &json!({ "nodes": g.node_count(), "order": order, "adjusted": a.adjusted }),
    )
}

fn node(a: &EmbedArgs, g: &SparseGraph, out: &OutDir) -> Result<()> {
    let x = features(a.features.as_deref(), "--features")?;
    let file: NodeWeightsFile = weights(a.weights.as_deref())?;
    let w = NodePropWeights::new(file.w1, file.w2)?;
    let mode = if a.unnormalized {
        PropagationMode::Unnormalized
    } else {
        PropagationMode::Normalized
    };
    let report = check_convergence_conditions(&w.w2, mode, g)?;
    let write_report = |iterations, residual| {
        out.write_json(
            "report.json",
            &Report {
                conditions: &report,
                violations: report.violations(),
                iterations,
                residual,
            },
        )
    };
    write_report(None, None)?;
    if !report.verdict && !a.force {
        return Err(Error::Infeasible(report.violations().join("; ")).into());
    }
    let sol = propagate_fixed_point(&x, &w, g, &a.solver.config(), mode)?;
    write_features(out.file("embedding.csv")?, "node", &sol.embedding)?;
    write_residual_log(out.file("residuals.csv")?, &sol.log)?;
    write_report(Some(sol.iterations), Some(sol.residual))
}

fn edge(a: &EmbedArgs, g: &SparseGraph, out: &OutDir) -> Result<()> {
    let x = features(a.features.as_deref(), "--features")?;
    let xe = features(a.edge_features.as_deref(), "--edge-features")?;
    let w: EdgePropWeights = weights(a.weights.as_deref())?;
    let coupling = if w.w6.is_some() || w.w7.is_some() {
        CouplingMode::Full
    } else {
        CouplingMode::Reduced
    };
    let report = check_edge2vec_conditions(&w, coupling, false)?;
    let write_report = |iterations, residual| {
        out.write_json(
            "report.json",
            &Report {
                conditions: &report,
                violations: report.violations(),
                iterations,
                residual,
            },
        )
    };
    write_report(None, None)?;
    if !report.verdict && !a.force {
        return Err(Error::Infeasible(report.violations().join("; ")).into());
    }
    let cfg = Edge2vecConfig {
        solver: a.solver.config(),
        enforce_conditions: !a.force,
        strict_positive: false,
    };
    let emb = match coupling {
        CouplingMode::Reduced => edge2vec_propagate(&x, &xe, &w, g, &cfg)?,
        CouplingMode::Full => full_coupled_propagate(&x, &xe, &w, g, &cfg)?,
    };
    write_features(out.file("nodes.csv")?, "node", &emb.nodes)?;
    write_features(out.file("edges.csv")?, "edge", &emb.edges)?;
    write_report(Some(emb.iterations), Some(emb.residual))
}
