use thiserror::Error;

/// Errors produced anywhere in the repair toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate edge ({i}, {j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("self loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({i}, {j}) has non-positive or non-finite weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },
    #[error("index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("label {value} at index {index} is not 0 or 1")]
    InvalidLabel { index: usize, value: u8 },
    #[error("graph has no edges (or zero total weight)")]
    EmptyGraph,
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("LSH recall {recall:.4} below target {target} with {tables} tables (cap reached)")]
    RecallUnreachable {
        recall: f64,
        target: f64,
        tables: usize,
    },
    #[error("total error budget must be non-negative, got {0}")]
    NegativeBudget(f64),
    #[error("LP solver failure: {0}")]
    SolverFailure(String),
    #[error("LP problem is infeasible")]
    Infeasible,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("solution conversion did not converge after {0} steps")]
    NonConvergence(usize),
    #[error("instance with {n} nodes exceeds the exhaustive limit of {max}")]
    InstanceTooLarge { n: usize, max: usize },
    #[error("branch and bound exceeded its node limit of {0}")]
    Timeout(usize),
    #[error("unknown repair method '{0}'")]
    UnknownMethod(String),
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("label column holds non-binary value '{value}' at row {row}")]
    NonBinaryLabel { row: usize, value: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
