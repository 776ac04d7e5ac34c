//! Variational path-integral generator: a recurrent network that emits
//! Gaussian-mixture distributions over discretized Euclidean paths, trained
//! to minimise the variational free energy, plus the exact reference
//! solutions used to check it.

pub mod autodiff;
pub mod config;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod lattice;
pub mod model;
pub mod optim;
pub mod oracles;
pub mod output;
pub mod rng;
pub mod toy;
pub mod train;

pub use error::{Error, Result};
pub use lattice::{LatticeSpec, PathBatch, Potential};
pub use model::{LatentBatch, ModelConfig, ModelParams};
pub use train::{train, RunStats, TrainConfig};
