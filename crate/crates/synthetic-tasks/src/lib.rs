//! Deterministic task generators: the two-class ring and the
//! rotation-estimation image-pair task with configurable symmetry
//! corruptions.

pub mod dataset_io;
pub mod oracle;
pub mod pairs;
pub mod render;
pub mod ring;
pub mod scene;

pub use dataset_io::{load_pairs, save_pairs, Sidecar};
pub use oracle::{CoRotatedPair, PairGeneratorOracle};
pub use pairs::{
    make_rotation_pairs, pair_label, CorruptionKind, LabeledImagePair, PairSetConfig,
    RotationPairSet, NUM_CLASSES,
};
pub use render::{render_scene, scene_fits, Camera};
pub use ring::{make_ring_dataset, ring_label, RingDataset};
pub use scene::{sample_scene, Marker, MarkerColor, Scene};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("bad configuration: {reason}")]
    BadConfig { reason: &'static str },
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Tensor(#[from] tensor_autodiff::TensorError),
}
