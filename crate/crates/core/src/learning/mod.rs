//! End-to-end training: a feature expander composed with a linear softmax
//! head, trained by full-batch or minibatch gradient descent.

mod expander;
mod objective;
mod train;

use serde::{Deserialize, Serialize};

pub use expander::{expand, Depth, ExpanderMode};
pub use objective::{cross_entropy, grad, gradient_check, log_softmax, loss, penalty, predict_proba, softmax, Gradients};
pub use train::{
    load_checkpoint, predict, save_checkpoint, train, write_train_log, Batch, Checkpoint, EpochRecord, Projection,
    TrainConfig, TrainOutcome,
};

use crate::edge2vec::EdgePropWeights;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream, uniform_matrix};

const STREAM_INIT: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub mode: ExpanderMode,
    /// Expander weights; present exactly for the propagating modes.
    pub expander: Option<EdgePropWeights>,
    /// `k x 2` weights of the linear head.
    pub head: Matrix,
    /// `1 x 2` head bias.
    pub bias: Matrix,
}

impl Model {
    pub fn new(mode: ExpanderMode, expander: Option<EdgePropWeights>, head: Matrix, bias: Matrix) -> Result<Self> {
        if mode.has_expander() != expander.is_some() {
            return Err(Error::InvalidParameter(format!(
                "{mode} {} expander weights",
                if mode.has_expander() { "requires" } else { "takes no" }
            )));
        }
        if let Some(w) = &expander {
            w.validate()?;
            if w.w1.cols() != head.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "expander emits width {}, head expects {}",
                    w.w1.cols(),
                    head.rows()
                )));
            }
        }
        if head.cols() != 2 || bias.shape() != (1, 2) {
            return Err(Error::DimensionMismatch(format!(
                "head {:?} and bias {:?} must map to two classes",
                head.shape(),
                bias.shape()
            )));
        }
        Ok(Self {
            mode,
            expander,
            head,
            bias,
        })
    }

    /// Seeded initialization for node features of width `d` and edge features
    /// of width `d_e`. The propagation matrix starts uniform in
    /// `[0, 0.1 / d']`, everything else in `[-0.1, 0.1]`, the bias at zero.
    pub fn init(mode: ExpanderMode, d: usize, d_e: usize, cfg: &TrainConfig) -> Self {
        let mut rng = stream(cfg.seed, STREAM_INIT);
        let (dn, de) = (cfg.node_dim, cfg.edge_dim);
        let mut u = |r, c| uniform_matrix(&mut rng, r, c, -0.1, 0.1);
        let (expander, width) = match mode {
            ExpanderMode::Control1 => (None, d_e),
            ExpanderMode::Control2 => (None, d_e + 2 * d),
            ExpanderMode::Edge2vec | ExpanderMode::Structure2vec => {
                let w1 = u(d_e, de);
                let w2 = u(dn, de);
                let w3 = u(dn, de);
                let w4 = u(d, dn);
                let w5 = uniform_matrix(&mut rng, dn, dn, 0.0, 0.1 / dn as f64);
                (Some(EdgePropWeights::reduced(w1, w2, w3, w4, w5).expect("shapes agree")), de)
            }
        };
        let head = uniform_matrix(&mut rng, width, 2, -0.1, 0.1);
        Self {
            mode,
            expander,
            head,
            bias: Matrix::zeros(1, 2),
        }
    }

    /// `[W1, W2, W3, W4, W5]` (propagating modes only), head, bias.
    pub fn parameters(&self) -> Vec<&Matrix> {
        let mut out: Vec<&Matrix> = match &self.expander {
            Some(w) => vec![&w.w1, &w.w2, &w.w3, &w.w4, &w.w5],
            None => Vec::new(),
        };
        out.push(&self.head);
        out.push(&self.bias);
        out
    }

    /// Mutable view in the order of [`Model::parameters`].
    pub fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = match &mut self.expander {
            Some(w) => vec![&mut w.w1, &mut w.w2, &mut w.w3, &mut w.w4, &mut w.w5],
            None => Vec::new(),
        };
        out.push(&mut self.head);
        out.push(&mut self.bias);
        out
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.parameters().iter().map(|m| m.max_abs()).fold(0.0, f64::max)
    }
}
