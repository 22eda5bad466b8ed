use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::io::parse_edge_list;

const KARATE_EDGES: &str = include_str!("../../data/karate.tsv");
const KARATE_COMMUNITIES: &str = include_str!("../../data/karate_communities.csv");

/// Zachary's karate club: 34 members, 78 undirected ties, and the two-way
/// split of the club (0 = instructor's faction, 1 = officer's faction).
pub fn load_zachary() -> Result<(SparseGraph, Vec<usize>)> {
    let edges = parse_edge_list(KARATE_EDGES, "karate.tsv")?;
    let communities = parse_communities(KARATE_COMMUNITIES)?;
    let g = SparseGraph::undirected(communities.len(), edges)?;
    Ok((g, communities))
}

fn parse_communities(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let err = |message: &str| Error::Parse {
            origin: "karate_communities.csv".into(),
            line: lineno + 1,
            message: message.into(),
        };
        let (node, comm) = line.split_once(',').ok_or_else(|| err("expected node,community"))?;
        let node: usize = node.parse().map_err(|_| err("bad node index"))?;
        if node != out.len() {
            return Err(err("nodes must be listed in order"));
        }
        out.push(comm.trim().parse().map_err(|_| err("bad community"))?);
    }
    Ok(out)
}
