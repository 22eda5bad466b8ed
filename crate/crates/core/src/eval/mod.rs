//! Evaluation: precision-recall curves, the mode comparison, the overflow
//! grid and community separation of embeddings.

mod community;
mod experiments;
mod pr;

pub use community::community_separation;
pub use experiments::{
    evaluate_mode, median, overflow_cell, overflow_experiment, run_comparison, ModeCurve, OverflowGrid,
};
pub use pr::{pr_curve, write_pr_csv, PRCurve, PrPoint};
