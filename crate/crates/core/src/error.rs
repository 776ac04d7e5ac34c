use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("path length {got} does not match lattice n_tau {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("loss node is not a scalar (shape {rows}x{cols})")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("tape has already been consumed by a backward pass")]
    TapeConsumed,

    #[error("minimal-action search did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("non-finite gradient in tensor `{tensor}`")]
    NonFiniteGradient { tensor: String },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("eigenstate {state} does not decay at the box boundary (|psi| = {amplitude:e})")]
    BoundaryDecay { state: usize, amplitude: f64 },

    #[error("enumeration budget exceeded: {configurations} configurations")]
    EnumerationBudget { configurations: u128 },

    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    ConfigValue(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
