use anyhow::{bail, Context, Result};
use featprop::data::{generate_fraud_dataset, LabeledEdgeDataset, Split};
use featprop::eval::{evaluate_mode, median, pr_curve, write_pr_csv, PRCurve};
use featprop::learning::{load_checkpoint, predict, save_checkpoint, train as fit, write_train_log, ExpanderMode};
use rayon::prelude::*;

use super::{build_pool, load_data};
use crate::args::{Cli, EvalArgs, GenerateArgs, TrainArgs};
use crate::output::OutDir;

pub fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let data = generate_fraud_dataset(&a.gen.config(a.seed))?;
    OutDir::create(&a.out, cli)?;
    data.write_dir(&a.out)?;
    println!(
        "{} nodes, {} edges, {} fraudulent",
        data.graph.node_count(),
        data.graph.edge_count(),
        data.fraud_count()
    );
    Ok(())
}

fn test_curve(data: &LabeledEdgeDataset, scores: &[f64]) -> Result<PRCurve> {
    let test = data.indices(Split::Test);
    let s: Vec<f64> = test.iter().map(|&e| scores[e]).collect();
    let y: Vec<bool> = test.iter().map(|&e| data.is_fraud(e)).collect();
    Ok(pr_curve(&s, &y)?)
}

pub fn train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let data = load_data(&a.data, a.seed)?;
    let cfg = a.hyper.config(a.seed, a.projection());
    let out = OutDir::create(&a.out, cli)?;
    let outcome = fit(&data, a.mode, &cfg)?;
    save_checkpoint(&out.path("checkpoint.json"), &outcome.model, data.x.cols(), data.xe.cols(), &cfg)?;
    write_train_log(out.file("train_log.csv")?, &outcome.log)?;
    let scores = predict(&outcome.model, &data, cfg.eval_depth())?;
    let curve = test_curve(&data, &scores)?;
    write_pr_csv(out.file("pr.csv")?, &curve)?;
    println!("{} test AUC-PR {:.6}", a.mode, curve.auc_pr);
    Ok(())
}

pub fn eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let out = OutDir::create(&a.out, cli)?;
    if let Some(path) = &a.checkpoint {
        let ck = load_checkpoint(path).with_context(|| format!("loading {}", path.display()))?;
        let data = load_data(&a.data, a.seed)?;
        if (data.x.cols(), data.xe.cols()) != (ck.d, ck.d_e) {
            bail!(
                "checkpoint expects feature widths ({}, {}), data has ({}, {})",
                ck.d,
                ck.d_e,
                data.x.cols(),
                data.xe.cols()
            );
        }
        let scores = predict(&ck.model, &data, ck.config.eval_depth())?;
        let curve = test_curve(&data, &scores)?;
        write_pr_csv(out.file(&format!("pr_{}.csv", ck.mode))?, &curve)?;
        let mut wtr = out.csv("summary.csv")?;
        wtr.write_record(["mode", "auc_pr"])?;
        wtr.write_record([ck.mode.name().to_string(), curve.auc_pr.to_string()])?;
        wtr.flush()?;
        println!("{} test AUC-PR {:.6}", ck.mode, curve.auc_pr);
        return Ok(());
    }

    if a.seeds == 0 || a.modes.is_empty() {
        bail!("--seeds and --modes must be nonempty");
    }
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let run = |seed: u64| -> Result<Vec<(ExpanderMode, PRCurve)>> {
        let data = load_data(&a.data, seed)?;
        let cfg = a.hyper.config(seed, a.projection.into());
        a.modes
            .iter()
            .map(|&m| Ok((m, evaluate_mode(&data, m, &cfg)?)))
            .collect()
    };
    let runs: Vec<Vec<(ExpanderMode, PRCurve)>> =
        build_pool(a.jobs)?.install(|| seeds.par_iter().map(|&s| run(s)).collect::<Result<_>>())?;

    let mut per_seed = out.csv("runs.csv")?;
    per_seed.write_record(["seed", "mode", "auc_pr"])?;
    for (seed, curves) in seeds.iter().zip(&runs) {
        for (mode, curve) in curves {
            per_seed.write_record([seed.to_string(), mode.name().to_string(), curve.auc_pr.to_string()])?;
            let name = if seeds.len() == 1 {
                format!("pr_{mode}.csv")
            } else {
                format!("pr_{mode}_seed{seed}.csv")
            };
            write_pr_csv(out.file(&name)?, curve)?;
        }
    }
    per_seed.flush()?;

    let mut summary = out.csv("summary.csv")?;
    summary.write_record(["mode", "auc_pr"])?;
    for (k, mode) in a.modes.iter().enumerate() {
        let aucs: Vec<f64> = runs.iter().map(|r| r[k].1.auc_pr).collect();
        let m = median(&aucs);
        summary.write_record([mode.name().to_string(), m.to_string()])?;
        println!("{mode:<14} median AUC-PR {m:.6} over {} seed(s)", aucs.len());
    }
    summary.flush()?;
    Ok(())
}
