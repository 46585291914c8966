//! Data augmentation utilities.

use rand::Rng;

use crate::rng::Prng;
use crate::tensor::Tensor;
use crate::TensorError;

/// Copies a contiguous [c, h, w] window at an offset drawn uniformly
/// over all valid placements.
pub fn random_crop(
    image: &Tensor,
    out_hw: (usize, usize),
    rng: &mut Prng,
) -> Result<Tensor, TensorError> {
    let (oh, ow) = out_hw;
    check_crop(image, oh, ow)?;
    let (h, w) = (image.shape()[1], image.shape()[2]);
    let dy = rng.gen_range(0..=h - oh);
    let dx = rng.gen_range(0..=w - ow);
    Ok(crop_at(image, dy, dx, oh, ow))
}

/// Deterministic crop centered in the frame; used for validation and test
/// data so evaluation never depends on the RNG.
pub fn center_crop(image: &Tensor, out_hw: (usize, usize)) -> Result<Tensor, TensorError> {
    let (oh, ow) = out_hw;
    check_crop(image, oh, ow)?;
    let (h, w) = (image.shape()[1], image.shape()[2]);
    Ok(crop_at(image, (h - oh) / 2, (w - ow) / 2, oh, ow))
}

fn check_crop(image: &Tensor, oh: usize, ow: usize) -> Result<(), TensorError> {
    if image.ndim() != 3 || oh == 0 || ow == 0 {
        return Err(TensorError::ShapeMismatch {
            context: "crop expects [c,h,w]",
            expected: vec![3],
            got: image.shape().to_vec(),
        });
    }
    let (h, w) = (image.shape()[1], image.shape()[2]);
    if oh > h || ow > w {
        return Err(TensorError::ShapeMismatch {
            context: "crop larger than input",
            expected: vec![h, w],
            got: vec![oh, ow],
        });
    }
    Ok(())
}

fn crop_at(image: &Tensor, dy: usize, dx: usize, oh: usize, ow: usize) -> Tensor {
    let (c, h, w) = (image.shape()[0], image.shape()[1], image.shape()[2]);
    debug_assert!(dy + oh <= h && dx + ow <= w);
    let mut out = Tensor::zeros(&[c, oh, ow]);
    for ci in 0..c {
        for y in 0..oh {
            let src = (ci * h + dy + y) * w + dx;
            let dst = (ci * oh + y) * ow;
            out.data_mut()[dst..dst + ow].copy_from_slice(&image.data()[src..src + ow]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_crop() {
        let img = Tensor::from_vec(&[1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = random_crop(&img, (2, 2), &mut seeded(0)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn crop_reproducible_under_seed() {
        let img = Tensor::from_vec(&[2, 19, 19], (0..2 * 19 * 19).map(|v| v as f64).collect())
            .unwrap();
        let a = random_crop(&img, (15, 15), &mut seeded(99)).unwrap();
        let b = random_crop(&img, (15, 15), &mut seeded(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_crop_rejected() {
        let img = Tensor::zeros(&[1, 5, 5]);
        assert!(random_crop(&img, (6, 5), &mut seeded(0)).is_err());
    }

    #[test]
    fn center_crop_of_odd_sizes_is_centered() {
        // 39 -> 31 leaves a 4-pixel margin on every side.
        let mut img = Tensor::zeros(&[1, 39, 39]);
        img.set3(0, 19, 19, 1.0);
        let out = center_crop(&img, (31, 31)).unwrap();
        assert_eq!(out.at3(0, 15, 15), 1.0);
    }
}
