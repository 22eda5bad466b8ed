use anyhow::{bail, Result};
use featprop::data::load_zachary;
use featprop::eval::{community_separation, overflow_cell, OverflowGrid};
use featprop::io::write_features;
use featprop::propagation::{random_init, structure_embedding, truncation_order};
use rayon::prelude::*;

use super::{build_pool, load_data};
use crate::args::{Cli, OverflowArgs, ZacharyArgs};
use crate::output::OutDir;

pub fn overflow(cli: &Cli, a: &OverflowArgs) -> Result<()> {
    if a.lambdas.is_empty() || a.orders.is_empty() {
        bail!("--lambdas and --orders must be nonempty");
    }
    let data = load_data(&a.data, a.seed)?;
    let base = a.hyper.config(a.seed, a.projection());
    let out = OutDir::create(&a.out, cli)?;
    let cells: Vec<(f64, usize)> = a
        .lambdas
        .iter()
        .flat_map(|&l| a.orders.iter().map(move |&k| (l, k)))
        .collect();
    let flat: Vec<bool> = build_pool(a.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(l, k)| overflow_cell(&data, l, k, &base))
            .collect::<featprop::error::Result<_>>()
    })?;
    let result = flat.chunks(a.orders.len()).map(<[bool]>::to_vec).collect();
    let grid = OverflowGrid::new(a.lambdas.clone(), a.orders.clone(), result)?;
    grid.write_csv(out.file("overflow.csv")?)?;
    grid.write_csv(std::io::stdout().lock())?;
    Ok(())
}

pub fn zachary(cli: &Cli, a: &ZacharyArgs) -> Result<()> {
    let (g, communities) = load_zachary()?;
    let out = OutDir::create(&a.out, cli)?;
    let mut wtr = out.csv("separation.csv")?;
    wtr.write_record(["seed", "alpha", "order", "ratio"])?;
    for seed in a.seed..a.seed + a.seeds {
        let c = random_init(g.node_count(), a.dim, seed);
        let mut ratios = Vec::new();
        for &alpha in &a.alphas {
            let order = truncation_order(alpha, 1e-10);
            let emb = structure_embedding(&g, &c, alpha, order, !a.raw)?;
            let ratio = community_separation(&emb, &communities)?;
            write_features(out.file(&format!("embedding_seed{seed}_alpha{alpha}.csv"))?, "node", &emb)?;
            wtr.write_record([seed.to_string(), alpha.to_string(), order.to_string(), ratio.to_string()])?;
            ratios.push(format!("{alpha}: {ratio:.4}"));
        }
        println!("seed {seed}  {}", ratios.join("  "));
    }
    wtr.flush()?;
    Ok(())
}
