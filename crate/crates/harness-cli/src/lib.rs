//! Experiment orchestration: model building, training, comparison,
//! diagnostics, and the CLI surface behind the `equisym` binary.

pub mod augment;
pub mod compare;
pub mod config;
pub mod diagnose;
pub mod models;
pub mod schema;
pub mod selftest;
pub mod train;

pub use config::{AugmentConfig, ExperimentConfig, ModelConfig, OptimConfig, TaskConfig};
pub use train::{train, train_on, RunMeta, RunReport, TrainOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {reason}")]
    Config { reason: String },
    #[error("training error: {reason}")]
    Train { reason: String },
    #[error("schema violation: {reason}")]
    Schema { reason: String },
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Tensor(#[from] tensor_autodiff::TensorError),
    #[error(transparent)]
    Group(#[from] group_core::GroupError),
    #[error(transparent)]
    Layer(#[from] equivariant_layers::LayerError),
    #[error(transparent)]
    Task(#[from] synthetic_tasks::TaskError),
    #[error(transparent)]
    Diag(#[from] symmetry_diagnostics::DiagError),
}
