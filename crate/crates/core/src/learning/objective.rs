//! Softmax cross-entropy with an L2 penalty on the expander weights, and its
//! exact gradient.

use super::expander::{backward, check_shapes, forward, Forward};
use super::{Model, TrainConfig};
use crate::data::LabeledEdgeDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Row-wise log-softmax of a logit matrix.
pub fn log_softmax(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        for v in row.iter_mut() {
            *v -= lse;
        }
    }
    out
}

pub fn softmax(z: &Matrix) -> Matrix {
    log_softmax(z).map(f64::exp)
}

/// Mean cross-entropy of predicted probabilities against one-hot labels.
pub fn cross_entropy(probs: &Matrix, labels: &Matrix) -> Result<f64> {
    check_labels(labels)?;
    if probs.shape() != labels.shape() {
        return Err(Error::DimensionMismatch(format!(
            "probabilities {:?} vs labels {:?}",
            probs.shape(),
            labels.shape()
        )));
    }
    let total: f64 = probs
        .as_slice()
        .iter()
        .zip(labels.as_slice())
        .filter(|(_, &y)| y != 0.0)
        .map(|(&p, &y)| -y * p.ln())
        .sum();
    Ok(total / labels.rows().max(1) as f64)
}

fn check_labels(labels: &Matrix) -> Result<()> {
    if labels.cols() != 2 {
        return Err(Error::DimensionMismatch(format!("labels have {} columns", labels.cols())));
    }
    for i in 0..labels.rows() {
        let (y0, y1) = (labels.get(i, 0), labels.get(i, 1));
        if !((y0 == 1.0 && y1 == 0.0) || (y0 == 0.0 && y1 == 1.0)) {
            return Err(Error::InvalidLabel { row: i, y0, y1 });
        }
    }
    Ok(())
}

/// `lambda` times the summed squared Frobenius norms of the expander weights.
pub fn penalty(model: &Model, lambda: f64) -> f64 {
    model
        .expander
        .as_ref()
        .map_or(0.0, |w| lambda * w.matrices().iter().map(|(_, m)| m.frobenius_sq()).sum::<f64>())
}

/// Gradients in the order of [`Model::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// `[W1, W2, W3, W4, W5]`, empty for the control modes.
    pub expander: Vec<Matrix>,
    pub head: Matrix,
    pub bias: Matrix,
}

impl Gradients {
    pub fn all(&self) -> Vec<&Matrix> {
        self.expander.iter().chain([&self.head, &self.bias]).collect()
    }
}

/// Features plus the cached pass needed for the gradient.
pub(crate) struct Expanded {
    pub features: Matrix,
    pub fw: Option<Forward>,
}

impl Expanded {
    pub fn max_activation(&self) -> f64 {
        self.fw.as_ref().map_or(self.features.max_abs(), |f| f.max_activation)
    }
}

pub(crate) fn expand_for_training(model: &Model, data: &LabeledEdgeDataset, depth: usize) -> Result<Expanded> {
    let (g, x, xe) = (&data.graph, &data.x, &data.xe);
    check_shapes(model.mode, x, xe, model.expander.as_ref(), g)?;
    Ok(match &model.expander {
        Some(w) => {
            let fw = forward(model.mode, x, xe, w, g, depth);
            Expanded {
                features: fw.features.clone(),
                fw: Some(fw),
            }
        }
        None => Expanded {
            features: super::expand(model.mode, x, xe, None, g, super::Depth::Unrolled(depth))?,
            fw: None,
        },
    })
}

fn logits(model: &Model, features: &Matrix) -> Result<Matrix> {
    if features.cols() != model.head.rows() {
        return Err(Error::DimensionMismatch(format!(
            "features have width {}, head expects {}",
            features.cols(),
            model.head.rows()
        )));
    }
    let mut z = features.mul(&model.head);
    for i in 0..z.rows() {
        for (v, b) in z.row_mut(i).iter_mut().zip(model.bias.as_slice()) {
            *v += b;
        }
    }
    Ok(z)
}

/// Class probabilities for every row of an expanded feature matrix.
pub fn predict_proba(model: &Model, features: &Matrix) -> Result<Matrix> {
    Ok(softmax(&logits(model, features)?))
}

fn batch_loss(model: &Model, ex: &Expanded, labels: &Matrix, batch: &[usize], lambda: f64) -> Result<f64> {
    let y = labels.select_rows(batch);
    check_labels(&y)?;
    let log_p = log_softmax(&logits(model, &ex.features.select_rows(batch))?);
    Ok(mean_nll(&log_p, &y) + penalty(model, lambda))
}

fn mean_nll(log_p: &Matrix, y: &Matrix) -> f64 {
    -log_p
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .filter(|(_, &yv)| yv != 0.0)
        .map(|(&lp, &yv)| yv * lp)
        .sum::<f64>()
        / y.rows() as f64
}

/// Training objective on the edges in `batch`, with propagation unrolled to
/// `cfg.unroll_depth`.
pub fn loss(model: &Model, data: &LabeledEdgeDataset, batch: &[usize], cfg: &TrainConfig) -> Result<f64> {
    check_batch(data, batch)?;
    let ex = expand_for_training(model, data, cfg.unroll_depth)?;
    batch_loss(model, &ex, &data.labels, batch, cfg.lambda)
}

fn check_batch(data: &LabeledEdgeDataset, batch: &[usize]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    if let Some(&e) = batch.iter().find(|&&e| e >= data.graph.edge_count()) {
        return Err(Error::InvalidParameter(format!("edge {e} is not in the graph")));
    }
    Ok(())
}

/// Exact gradient of [`loss`] through the unrolled propagation.
pub fn grad(model: &Model, data: &LabeledEdgeDataset, batch: &[usize], cfg: &TrainConfig) -> Result<Gradients> {
    check_batch(data, batch)?;
    let ex = expand_for_training(model, data, cfg.unroll_depth)?;
    Ok(grad_from(model, data, &ex, batch, cfg.lambda)?.1)
}

/// Loss and gradient from a precomputed expansion.
pub(crate) fn grad_from(
    model: &Model,
    data: &LabeledEdgeDataset,
    ex: &Expanded,
    batch: &[usize],
    lambda: f64,
) -> Result<(f64, Gradients)> {
    let fb = ex.features.select_rows(batch);
    let y = data.labels.select_rows(batch);
    check_labels(&y)?;
    let log_p = log_softmax(&logits(model, &fb)?);
    let loss = mean_nll(&log_p, &y) + penalty(model, lambda);

    // d loss / d logits = (p - y) / B
    let inv_b = 1.0 / batch.len() as f64;
    let mut g_z = log_p.map(f64::exp);
    for (v, yv) in g_z.as_mut_slice().iter_mut().zip(y.as_slice()) {
        *v = (*v - yv) * inv_b;
    }
    let head = fb.t_mul(&g_z);
    let bias = Matrix::from_raw(1, 2, g_z.col_sums());

    let expander = match (&model.expander, &ex.fw) {
        (Some(w), Some(fw)) => {
            let g_fb = g_z.mul_t(&model.head);
            let mut g_feat = Matrix::zeros(ex.features.rows(), ex.features.cols());
            for (r, &e) in batch.iter().enumerate() {
                for (dst, src) in g_feat.row_mut(e).iter_mut().zip(g_fb.row(r)) {
                    *dst += src;
                }
            }
            let mut grads = backward(model.mode, &data.x, &data.xe, w, &data.graph, fw, &g_feat);
            for (gm, (_, wm)) in grads.iter_mut().zip(w.matrices()) {
                gm.axpy(2.0 * lambda, wm);
            }
            grads.into_iter().collect()
        }
        _ => Vec::new(),
    };
    Ok((loss, Gradients { expander, head, bias }))
}

/// Largest relative error, over parameter matrices, between [`grad`] and
/// central finite differences of [`loss`] with step `h`. Each matrix is
/// compared in Frobenius norm, relative to the larger of the two gradients;
/// matrices whose gradients are both below `1e-7` are compared absolutely.
pub fn gradient_check(
    model: &Model,
    data: &LabeledEdgeDataset,
    batch: &[usize],
    cfg: &TrainConfig,
    h: f64,
) -> Result<f64> {
    let analytic = grad(model, data, batch, cfg)?;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.all().into_iter().enumerate() {
        let mut numeric = Matrix::zeros(a.rows(), a.cols());
        for idx in 0..a.as_slice().len() {
            let orig = probe.parameters()[k].as_slice()[idx];
            probe.parameters_mut()[k].as_mut_slice()[idx] = orig + h;
            let up = loss(&probe, data, batch, cfg)?;
            probe.parameters_mut()[k].as_mut_slice()[idx] = orig - h;
            let down = loss(&probe, data, batch, cfg)?;
            probe.parameters_mut()[k].as_mut_slice()[idx] = orig;
            numeric.as_mut_slice()[idx] = (up - down) / (2.0 * h);
        }
        let diff = a.sub(&numeric)?.frobenius_sq().sqrt();
        let scale = a.frobenius_sq().sqrt().max(numeric.frobenius_sq().sqrt()).max(1e-7);
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}
