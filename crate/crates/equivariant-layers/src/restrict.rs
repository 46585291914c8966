//! Action restriction: fold a spatial regular feature map into a pure
//! group axis, restricting translation-plus-dihedral symmetry to the
//! dihedral group alone.

use group_core::{Group, GroupElement, GroupKind, ResampleMode};
use tensor_autodiff::Tensor;

use crate::conv::act_on_features;
use crate::LayerError;

/// Input: [c*2k, h, w] regular features over D_k with odd h, w.
/// Output: [1, 1, h*w*c*2k, 2k]; slice [..., g] is the flattened g-acted
/// feature map, so the new axis carries the regular representation and
/// a D_k transform of the input becomes a right-multiplication
/// permutation of that axis.
pub fn action_restrict_flatten(group: &Group, feat: &Tensor) -> Result<Tensor, LayerError> {
    if group.kind() != GroupKind::Dihedral {
        return Err(LayerError::BadConfig {
            reason: "action restriction is defined for dihedral groups",
        });
    }
    let order = group.order();
    if feat.ndim() != 3 || feat.shape()[0] % order != 0 {
        return Err(LayerError::BadInput {
            reason: "expected [c*|G|, h, w] regular features",
            got: feat.shape().to_vec(),
        });
    }
    let (ct, h, w) = (feat.shape()[0], feat.shape()[1], feat.shape()[2]);
    if h % 2 == 0 || w % 2 == 0 {
        return Err(LayerError::BadInput {
            reason: "spatial sizes must be odd",
            got: feat.shape().to_vec(),
        });
    }
    let flat = ct * h * w;
    let batched = feat.reshaped(&[1, ct, h, w]).unwrap();
    let mut out = Tensor::zeros(&[1, 1, flat, order]);
    for g in group.elements() {
        let moved = act_on_features(group, *g, &batched, ResampleMode::Exact)?;
        for (i, &v) in moved.data().iter().enumerate() {
            out.data_mut()[i * order + g.index] = v;
        }
    }
    Ok(out)
}

/// The right-multiplication permutation of the restricted group axis
/// induced by transforming the input with g0:
/// arf(g0 . I)[.., g] = arf(I)[.., g * g0].
pub fn restricted_axis_permutation(group: &Group, g0: GroupElement) -> Vec<usize> {
    group
        .elements()
        .iter()
        .map(|g| group.compose_idx(g.index, g0.index))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use group_core::make_group;

    #[test]
    fn d1_on_single_pixel_stacks_identity_and_reflection() {
        let g = make_group(GroupKind::Dihedral, 1).unwrap();
        // one base channel, |G| = 2 slots, 1x1 spatial
        let feat = Tensor::from_vec(&[2, 1, 1], vec![3.0, 5.0]).unwrap();
        let out = action_restrict_flatten(&g, &feat).unwrap();
        assert_eq!(out.shape(), &[1, 1, 2, 2]);
        // identity slice: original; reflection slice: channel-swapped
        assert_eq!(out.data(), &[3.0, 5.0, 5.0, 3.0]);
    }

    #[test]
    fn constant_image_gives_identical_group_slices() {
        let g = make_group(GroupKind::Dihedral, 2).unwrap();
        let feat = Tensor::filled(&[4, 3, 3], 0.7);
        let out = action_restrict_flatten(&g, &feat).unwrap();
        let flat = 4 * 9;
        for i in 0..flat {
            for s in 1..4 {
                assert_eq!(out.data()[i * 4 + s], out.data()[i * 4]);
            }
        }
    }

    #[test]
    fn non_dihedral_group_rejected() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let feat = Tensor::zeros(&[4, 3, 3]);
        assert!(action_restrict_flatten(&g, &feat).is_err());
    }
}
