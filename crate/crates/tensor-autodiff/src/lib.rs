//! Minimal dense-tensor reverse-mode differentiation engine.
//!
//! Everything is double precision and deterministic: identical inputs
//! and seeds produce bit-identical outputs. Stochastic operations take
//! an explicit seeded RNG.

pub mod adam;
pub mod augment;
pub mod gradcheck;
pub mod graph;
pub mod ops;
pub mod rng;
pub mod serialize;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use graph::{CustomOp, Gradients, NodeId, Tape};
pub use rng::{derive_seed, seeded, Prng};
pub use tensor::{stable_sum, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("{context}: expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("loss must be scalar, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("non-finite gradient for parameter {param_index}; step aborted")]
    NonFiniteGradient { param_index: usize },
    #[error("invalid hyperparameter {name} = {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("io error: {0}")]
    Io(String),
}
