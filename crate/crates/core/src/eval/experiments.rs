use std::io::Write;

use serde::{Deserialize, Serialize};

use super::pr::{pr_curve, PRCurve};
use crate::data::{LabeledEdgeDataset, Split};
use crate::error::{Error, Result};
use crate::learning::{predict, train, ExpanderMode, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCurve {
    pub mode: ExpanderMode,
    pub curve: PRCurve,
}

/// Test-split precision-recall curve of a model trained on the train split.
pub fn evaluate_mode(data: &LabeledEdgeDataset, mode: ExpanderMode, cfg: &TrainConfig) -> Result<PRCurve> {
    let out = train(data, mode, cfg)?;
    let scores = predict(&out.model, data, cfg.eval_depth())?;
    let test = data.indices(Split::Test);
    let s: Vec<f64> = test.iter().map(|&e| scores[e]).collect();
    let y: Vec<bool> = test.iter().map(|&e| data.is_fraud(e)).collect();
    pr_curve(&s, &y)
}

/// Trains and evaluates each `(mode, config)` pair on the same dataset.
pub fn run_comparison(data: &LabeledEdgeDataset, cfgs: &[(ExpanderMode, TrainConfig)]) -> Result<Vec<ModeCurve>> {
    cfgs.iter()
        .map(|(mode, cfg)| {
            Ok(ModeCurve {
                mode: *mode,
                curve: evaluate_mode(data, *mode, cfg)?,
            })
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Yes/no overflow outcomes indexed by `[lambda][order]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverflowGrid {
    pub lambdas: Vec<f64>,
    pub orders: Vec<usize>,
    pub result: Vec<Vec<bool>>,
}

impl OverflowGrid {
    pub fn new(lambdas: Vec<f64>, orders: Vec<usize>, result: Vec<Vec<bool>>) -> Result<Self> {
        if result.len() != lambdas.len() || result.iter().any(|r| r.len() != orders.len()) {
            return Err(Error::DimensionMismatch(format!(
                "grid result does not match {} lambdas x {} orders",
                lambdas.len(),
                orders.len()
            )));
        }
        Ok(Self { lambdas, orders, result })
    }

    /// Cells that break the staircase: an overflow at `(lambda, k)` must
    /// also appear at every `(lambda', k')` with `lambda' <= lambda` and
    /// `k' >= k`. Each entry names the overflowing cell and the cell that
    /// failed to overflow, as `((lambda, k), (lambda', k'))`.
    pub fn staircase_violations(&self) -> Vec<((f64, usize), (f64, usize))> {
        let mut out = Vec::new();
        for (i, &l) in self.lambdas.iter().enumerate() {
            for (j, &k) in self.orders.iter().enumerate() {
                if !self.result[i][j] {
                    continue;
                }
                for (i2, &l2) in self.lambdas.iter().enumerate() {
                    for (j2, &k2) in self.orders.iter().enumerate() {
                        if l2 <= l && k2 >= k && !self.result[i2][j2] {
                            out.push(((l, k), (l2, k2)));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_staircase(&self) -> bool {
        self.staircase_violations().is_empty()
    }

    pub fn count_overflows(&self) -> usize {
        self.result.iter().flatten().filter(|&&y| y).count()
    }

    pub fn cell_count(&self) -> usize {
        self.lambdas.len() * self.orders.len()
    }

    /// Rows of lambdas, columns of orders, `Y`/`N` entries, then a comment
    /// line stating whether the staircase holds.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        {
            let mut wtr = csv::Writer::from_writer(&mut w);
            let mut header = vec!["lambda".to_string()];
            header.extend(self.orders.iter().map(|k| k.to_string()));
            wtr.write_record(&header)?;
            for (l, row) in self.lambdas.iter().zip(&self.result) {
                let mut rec = vec![format!("{l:e}")];
                rec.extend(row.iter().map(|&y| if y { "Y" } else { "N" }.to_string()));
                wtr.write_record(&rec)?;
            }
            wtr.flush()?;
        }
        let violations = self.staircase_violations();
        match violations.first() {
            None => writeln!(w, "# staircase: monotone")?,
            Some(((l, k), (l2, k2))) => writeln!(
                w,
                "# staircase: violated ({} cases), e.g. overflow at lambda={l:e} order={k} but not at lambda={l2:e} order={k2}",
                violations.len()
            )?,
        }
        Ok(())
    }
}

/// Whether training overflows at one grid cell. Order 0 means no
/// propagation at all and trains a plain softmax regression on the raw
/// endpoint features; higher orders train structure2vec unrolled that deep.
pub fn overflow_cell(data: &LabeledEdgeDataset, lambda: f64, order: usize, base: &TrainConfig) -> Result<bool> {
    let mode = if order == 0 {
        ExpanderMode::Control2
    } else {
        ExpanderMode::Structure2vec
    };
    let cfg = TrainConfig {
        lambda,
        unroll_depth: order.max(1),
        ..base.clone()
    };
    match train(data, mode, &cfg) {
        Ok(_) => Ok(false),
        Err(Error::TrainingOverflow { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Runs every `(lambda, order)` cell in sequence. `base.projection` picks
/// the regime: `Nonnegative` clamps W5 at zero but leaves its column sums
/// free, `Feasible` keeps W5 inside the convergence region.
pub fn overflow_experiment(
    data: &LabeledEdgeDataset,
    lambdas: &[f64],
    orders: &[usize],
    base: &TrainConfig,
) -> Result<OverflowGrid> {
    let result = lambdas
        .iter()
        .map(|&l| orders.iter().map(|&k| overflow_cell(data, l, k, base)).collect())
        .collect::<Result<Vec<Vec<bool>>>>()?;
    OverflowGrid::new(lambdas.to_vec(), orders.to_vec(), result)
}
