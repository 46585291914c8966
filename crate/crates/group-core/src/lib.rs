//! Finite group algebra for equivariant networks: cyclic and dihedral
//! groups, their representations, actions on images and finite sets,
//! and orbit/stabilizer enumeration.
//!
//! Only finite C_n / D_n are modeled. Continuous symmetries show up in
//! the problem domain as latent structure but every concrete network
//! constraint here is built from a finite subgroup, so nothing in this
//! crate needs Lie-group machinery.

pub mod action;
pub mod group;
pub mod image_action;
pub mod rep;

pub use action::{orbit_stabilizer, orbits, ActionSpec, FiniteAction, OrbitStabilizer};
pub use group::{make_group, Group, GroupElement, GroupKind, GroupSpec};
pub use image_action::{
    act_on_image, bilinear_pixel_weights, exact_pixel_map, is_grid_exact, ResampleMode,
};
pub use rep::{exact_cos_sin, rep_matrix, validate_representation, RepKind, RepMatrix, Representation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("group order parameter must be positive, got {n}")]
    InvalidOrder { n: usize },
    #[error("composition table invalid: {reason}")]
    TableInvalid { reason: &'static str },
    #[error("representation invalid: {reason}")]
    RepresentationInvalid { reason: &'static str },
    #[error("action invalid: {reason}")]
    ActionInvalid { reason: &'static str },
    #[error("image action invalid: {reason}")]
    ImageActionInvalid { reason: &'static str },
}
