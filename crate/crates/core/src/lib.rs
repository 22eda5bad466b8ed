// `!(x <= limit)` is used on purpose throughout: it also catches NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod rng;
pub mod propagation;
pub mod edge2vec;
pub mod data;
pub mod learning;
pub mod eval;
