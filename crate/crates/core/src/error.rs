use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node `{node}` (graphs must not contain self-loops)")]
    SelfLoop { line: usize, node: String },

    #[error("line {line}: edge weight {weight} is not strictly positive")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("graph is disconnected: {} components with sizes {sizes:?}", sizes.len())]
    Disconnected { sizes: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no connected SBM sample after {attempts} attempts; increase avg_degree or d_out")]
    SbmConnectivity { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("perplexity calibration failed on row {row}")]
    Bandwidth { row: usize },

    #[error("observation {index}: {source}")]
    Observation { index: usize, source: Box<Error> },

    #[error("pair ({i}, {j}): {source}")]
    Pair { i: usize, j: usize, source: Box<Error> },

    #[error("labelings differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("empty labeling")]
    EmptyLabeling,

    #[error("invalid composition: {0}")]
    Composition(String),
}
