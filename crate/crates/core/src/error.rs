use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge} ({source_node} -> {target_node}) references a node outside 0..{n}")]
    NodeOutOfRange {
        edge: usize,
        source_node: usize,
        target_node: usize,
        n: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("convergence conditions violated: {0}")]
    Infeasible(String),

    #[error("overflow detected at iteration {iteration}: max |entry| = {max_abs:e}")]
    OverflowDetected { iteration: usize, max_abs: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("system of size {size} exceeds the dense-solve limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("label row {row} is not one-hot: [{y0}, {y1}]")]
    InvalidLabel { row: usize, y0: f64, y1: f64 },

    #[error("numeric overflow during training at epoch {epoch}: {condition}")]
    TrainingOverflow { epoch: usize, condition: String },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
