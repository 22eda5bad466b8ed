use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::expander::{expand, Depth, ExpanderMode};
use super::objective::{expand_for_training, grad_from, predict_proba};
use super::Model;
use crate::data::{LabeledEdgeDataset, Split};
use crate::error::{Error, Result};
use crate::propagation::{project_for_mode, ConvergenceReport, SolverConfig};
use crate::rng::stream;

const STREAM_SHUFFLE: u64 = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Batch {
    Full,
    Minibatch(usize),
}

/// Constraint applied to the propagation matrix W5 after every update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// W5 is left unconstrained.
    Off,
    /// Negative entries are clamped to zero; column sums are not capped.
    Nonnegative,
    /// Clamp and cap column sums, keeping W5 inside the convergence region.
    Feasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Propagation steps differentiated through during training.
    pub unroll_depth: usize,
    pub batch: Batch,
    pub seed: u64,
    pub projection: Projection,
    pub projection_margin: f64,
    /// Node embedding width `d'`.
    pub node_dim: usize,
    /// Edge embedding width `d''`.
    pub edge_dim: usize,
    /// Solver used when evaluating edge2vec to convergence; its overflow
    /// limit also bounds weights and activations during training.
    pub solver: SolverConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            learning_rate: 1.0,
            epochs: 500,
            unroll_depth: 3,
            batch: Batch::Full,
            seed: 0,
            projection: Projection::Feasible,
            projection_margin: 1e-3,
            node_dim: 4,
            edge_dim: 4,
            solver: SolverConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.unroll_depth == 0 {
            return bad("unroll depth must be at least 1".into());
        }
        if self.batch == Batch::Minibatch(0) {
            return bad("minibatch size must be positive".into());
        }
        if !(self.projection_margin > 0.0 && self.projection_margin < 1.0) {
            return bad(format!("projection margin must lie in (0, 1), got {}", self.projection_margin));
        }
        if self.node_dim == 0 || self.edge_dim == 0 {
            return bad("embedding widths must be positive".into());
        }
        self.solver.validate()
    }

    /// Expansion depth used at evaluation time.
    pub fn eval_depth(&self) -> Depth {
        Depth::Converged {
            solver: self.solver,
            unroll_depth: self.unroll_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean objective over the epoch's batches, before their updates.
    pub loss: f64,
    pub max_abs_weight: f64,
    pub w5_colsum_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: Vec<EpochRecord>,
}

fn w5_report(model: &Model, data: &LabeledEdgeDataset) -> Option<ConvergenceReport> {
    let (op, _) = model.mode.propagation()?;
    let w5 = &model.expander.as_ref()?.w5;
    Some(ConvergenceReport::evaluate(w5, op, op.colsum_limit(&data.graph), false))
}

fn overflow(model: &Model, data: &LabeledEdgeDataset, epoch: usize, what: String) -> Error {
    let mut condition = what;
    if let Some(report) = w5_report(model, data) {
        let violations = report.violations();
        if violations.is_empty() {
            condition.push_str("; W5 satisfies the convergence conditions");
        } else {
            condition.push_str("; W5: ");
            condition.push_str(&violations.join(", "));
        }
    }
    Error::TrainingOverflow { epoch, condition }
}

fn project_w5(model: &mut Model, data: &LabeledEdgeDataset, cfg: &TrainConfig) {
    let (Some((op, _)), Some(w)) = (model.mode.propagation(), model.expander.as_mut()) else {
        return;
    };
    match cfg.projection {
        Projection::Off => {}
        Projection::Nonnegative => w.w5 = w.w5.map(|v| v.max(0.0)),
        Projection::Feasible => w.w5 = project_for_mode(&w.w5, op, &data.graph, cfg.projection_margin),
    }
}

/// Gradient descent on the training split. Overflow of the loss, of any
/// activation or of any weight aborts with [`Error::TrainingOverflow`], as
/// does a trained edge2vec model whose propagation diverges when solved to
/// convergence.
pub fn train(data: &LabeledEdgeDataset, mode: ExpanderMode, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_idx = data.indices(Split::Train);
    if train_idx.is_empty() {
        return Err(Error::InvalidParameter("dataset has no training edges".into()));
    }
    let limit = cfg.solver.overflow_limit;
    let mut model = Model::init(mode, data.x.cols(), data.xe.cols(), cfg);
    project_w5(&mut model, data, cfg);
    let mut rng = stream(cfg.seed, STREAM_SHUFFLE);
    let mut order = train_idx.clone();
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let batches: Vec<&[usize]> = match cfg.batch {
            Batch::Full => vec![&train_idx[..]],
            Batch::Minibatch(size) => {
                order.shuffle(&mut rng);
                order.chunks(size).collect()
            }
        };
        let mut loss_sum = 0.0;
        for batch in batches {
            let ex = expand_for_training(&model, data, cfg.unroll_depth)?;
            let act = ex.max_activation();
            if !(act <= limit) {
                return Err(overflow(&model, data, epoch, format!("activation magnitude {act:.3e} exceeds {limit:.0e}")));
            }
            let (loss, grads) = grad_from(&model, data, &ex, batch, cfg.lambda)?;
            if !loss.is_finite() {
                return Err(overflow(&model, data, epoch, format!("loss became {loss}")));
            }
            loss_sum += loss * batch.len() as f64;
            for (p, g) in model.parameters_mut().into_iter().zip(grads.all()) {
                p.axpy(-cfg.learning_rate, g);
            }
            project_w5(&mut model, data, cfg);
            let wmax = model.max_abs_weight();
            if !(wmax <= limit) {
                return Err(overflow(&model, data, epoch, format!("weight magnitude {wmax:.3e} exceeds {limit:.0e}")));
            }
        }
        log.push(EpochRecord {
            epoch,
            loss: loss_sum / train_idx.len() as f64,
            max_abs_weight: model.max_abs_weight(),
            w5_colsum_max: w5_report(&model, data).map(|r| r.colsum_max),
        });
    }
    if mode == ExpanderMode::Edge2vec {
        // the trained propagation must also survive solving to convergence
        let solved = expand(mode, &data.x, &data.xe, model.expander.as_ref(), &data.graph, cfg.eval_depth());
        if let Err(Error::OverflowDetected { iteration, max_abs }) = solved {
            let what = format!("evaluation-time propagation overflowed at iteration {iteration} (max |entry| {max_abs:.3e})");
            return Err(overflow(&model, data, cfg.epochs, what));
        }
        solved?;
    }
    Ok(TrainOutcome { model, log })
}

/// Fraud probability (class 0) for every edge of `data`.
pub fn predict(model: &Model, data: &LabeledEdgeDataset, depth: Depth) -> Result<Vec<f64>> {
    let features = expand(model.mode, &data.x, &data.xe, model.expander.as_ref(), &data.graph, depth)?;
    let probs = predict_proba(model, &features)?;
    Ok((0..probs.rows()).map(|i| probs.get(i, 0)).collect())
}

pub fn write_train_log<W: Write>(w: W, log: &[EpochRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["epoch", "loss", "max_abs_weight", "w5_colsum_max"])?;
    for r in log {
        wtr.write_record([
            r.epoch.to_string(),
            r.loss.to_string(),
            r.max_abs_weight.to_string(),
            r.w5_colsum_max.map_or_else(String::new, |v| v.to_string()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub mode: ExpanderMode,
    /// Node and edge feature widths the model was trained on.
    pub d: usize,
    pub d_e: usize,
    pub seed: u64,
    pub config: TrainConfig,
    pub model: Model,
}

pub fn save_checkpoint(path: &Path, model: &Model, d: usize, d_e: usize, cfg: &TrainConfig) -> Result<()> {
    let ck = Checkpoint {
        mode: model.mode,
        d,
        d_e,
        seed: cfg.seed,
        config: cfg.clone(),
        model: model.clone(),
    };
    fs::write(path, serde_json::to_string_pretty(&ck)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let ck: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    let m = ck.model;
    let model = Model::new(m.mode, m.expander, m.head, m.bias)?;
    Ok(Checkpoint { model, ..ck })
}
