//! Group-equivariant layers on top of the tensor tape: lifting and
//! group convolutions under the kernel weight-tying constraint,
//! invariant pooling, mixed-representation actor/critic heads, and the
//! action-restriction flatten.

pub mod conv;
pub mod heads;
pub mod pool;
pub mod restrict;

pub use conv::{
    act_on_features, act_on_image_batch, group_conv, kernel_constraint_residual, lift_conv,
    EquivConvLayer, LayerRep,
};
pub use heads::{
    act_on_regular_vector, check_actor_equivariance, check_critic_invariance,
    group_algebra_apply, ActorHead, InvariantCritic, MixedActionValue,
};
pub use pool::{group_pool_tape, group_pool_tensor};
pub use restrict::{action_restrict_flatten, restricted_axis_permutation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayerError {
    #[error("bad layer configuration: {reason}")]
    BadConfig { reason: &'static str },
    #[error("bad input ({reason}): got shape {got:?}")]
    BadInput { reason: &'static str, got: Vec<usize> },
    #[error(transparent)]
    Group(#[from] group_core::GroupError),
    #[error(transparent)]
    Tensor(#[from] tensor_autodiff::TensorError),
}
