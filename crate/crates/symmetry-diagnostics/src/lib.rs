//! Symmetry diagnostics: classify a (dataset, action) pair as correct,
//! incorrect, or extrinsic equivariance, and compute exact accuracy
//! upper bounds for invariance-constrained models on finite instances.

pub mod bounds;
pub mod classify;
pub mod golden;
pub mod instance;
pub mod oracle;
pub mod random_instances;

pub use bounds::{loose_bound, tight_bound, TightBound};
pub use classify::{
    classify_action, EquivarianceVerdict, MembershipOracle, NearestNeighborOracle,
    PredicateOracle, VerdictKind,
};
pub use instance::{
    consensus_analysis, ConsensusReport, InstanceSpec, OrbitReport, SymmetryInstance,
};
pub use oracle::best_invariant_accuracy;
pub use random_instances::random_instance;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagError {
    #[error("invalid instance: {reason}")]
    Invalid { reason: String },
    #[error(transparent)]
    Group(#[from] group_core::GroupError),
}
