//! Image-transform augmentation: both frames of a pair rotate by the
//! same C8 element; labels stay untouched.

use group_core::{act_on_image, make_group, Group, GroupKind, ResampleMode};
use tensor_autodiff::rng::Prng;
use tensor_autodiff::Tensor;

use crate::HarnessError;

fn c8() -> Group {
    make_group(GroupKind::Cyclic, 8).expect("C8 exists")
}

/// Rotates a stacked [8, h, w] pair image by `steps` eighth-turns:
/// exact pixel permutation for quarter turns, bilinear otherwise.
pub fn rotate_pair_image(stacked: &Tensor, steps: usize) -> Result<Tensor, HarnessError> {
    if steps == 0 {
        return Ok(stacked.clone());
    }
    let group = c8();
    let g = group.element(steps % 8);
    let mode = if group_core::is_grid_exact(&group, g) {
        ResampleMode::Exact
    } else {
        ResampleMode::Bilinear { fill: 0.0 }
    };
    act_on_image(&group, g, stacked, mode).map_err(HarnessError::Group)
}

/// Replaces every sample with a uniformly drawn C8 rotation of itself.
pub fn image_transform_augment(
    batch: &[Tensor],
    rng: &mut Prng,
) -> Result<Vec<Tensor>, HarnessError> {
    use rand::Rng;
    batch
        .iter()
        .map(|t| rotate_pair_image(t, rng.gen_range(0..8usize)))
        .collect()
}
