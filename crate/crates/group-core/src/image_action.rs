//! Group actions on [c, h, w] pixel grids.
//!
//! The action convention is (g . I)(p) = I(g^-1 p) about the image
//! center, with y up, so composition satisfies g.(h.I) = (gh).I.
//! Exact mode is a pure pixel permutation and is only defined for
//! elements whose 2D matrix is a signed permutation (quarter turns and
//! axis/diagonal reflections). Spatial sizes must be odd; rotating an
//! even grid about a non-pixel center has no exact representation.

use tensor_autodiff::Tensor;

use crate::group::{Group, GroupElement};
use crate::rep::{rep_matrix, RepKind};
use crate::GroupError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResampleMode {
    Exact,
    Bilinear { fill: f64 },
}

/// True when g maps the pixel grid to itself.
pub fn is_grid_exact(group: &Group, g: GroupElement) -> bool {
    rep_matrix(group, RepKind::Standard2d, g).is_signed_permutation()
}

/// For each output pixel (row-major over h x w), the source pixel index
/// under the exact action of g.
pub fn exact_pixel_map(
    group: &Group,
    g: GroupElement,
    h: usize,
    w: usize,
) -> Result<Vec<usize>, GroupError> {
    if h % 2 == 0 || w % 2 == 0 {
        return Err(GroupError::ImageActionInvalid {
            reason: "spatial sizes must be odd",
        });
    }
    let m = rep_matrix(group, RepKind::Standard2d, g);
    if !m.is_signed_permutation() {
        return Err(GroupError::ImageActionInvalid {
            reason: "element does not preserve the pixel grid; use bilinear mode",
        });
    }
    let inv = m.transpose(); // orthogonal
    let swaps_axes = inv.at(0, 1) != 0.0;
    if swaps_axes && h != w {
        return Err(GroupError::ImageActionInvalid {
            reason: "axis-swapping element requires a square image",
        });
    }
    let (a00, a01, a10, a11) = (
        inv.at(0, 0) as i64,
        inv.at(0, 1) as i64,
        inv.at(1, 0) as i64,
        inv.at(1, 1) as i64,
    );
    let (cy, cx) = ((h / 2) as i64, (w / 2) as i64);
    let mut map = Vec::with_capacity(h * w);
    for i in 0..h as i64 {
        for j in 0..w as i64 {
            let (x, y) = (j - cx, cy - i);
            let xs = a00 * x + a01 * y;
            let ys = a10 * x + a11 * y;
            let (si, sj) = (cy - ys, xs + cx);
            debug_assert!(si >= 0 && si < h as i64 && sj >= 0 && sj < w as i64);
            map.push((si * w as i64 + sj) as usize);
        }
    }
    Ok(map)
}

/// For each output pixel, bilinear taps (source index, weight) under the
/// action of g; out-of-frame mass is dropped (it belongs to the fill).
pub fn bilinear_pixel_weights(
    group: &Group,
    g: GroupElement,
    h: usize,
    w: usize,
) -> Result<Vec<Vec<(usize, f64)>>, GroupError> {
    if h % 2 == 0 || w % 2 == 0 {
        return Err(GroupError::ImageActionInvalid {
            reason: "spatial sizes must be odd",
        });
    }
    let inv = rep_matrix(group, RepKind::Standard2d, g).transpose();
    let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
    let mut out = Vec::with_capacity(h * w);
    for i in 0..h {
        for j in 0..w {
            let (x, y) = (j as f64 - cx, cy - i as f64);
            let xs = inv.at(0, 0) * x + inv.at(0, 1) * y;
            let ys = inv.at(1, 0) * x + inv.at(1, 1) * y;
            let (si, sj) = (cy - ys, xs + cx);
            let (i0, j0) = (si.floor(), sj.floor());
            let (di, dj) = (si - i0, sj - j0);
            let mut taps = Vec::with_capacity(4);
            for (ii, wi) in [(i0, 1.0 - di), (i0 + 1.0, di)] {
                for (jj, wj) in [(j0, 1.0 - dj), (j0 + 1.0, dj)] {
                    let wgt = wi * wj;
                    if wgt == 0.0 {
                        continue;
                    }
                    if ii >= 0.0 && ii < h as f64 && jj >= 0.0 && jj < w as f64 {
                        taps.push((ii as usize * w + jj as usize, wgt));
                    }
                }
            }
            out.push(taps);
        }
    }
    Ok(out)
}

/// Applies g to every channel of a [c, h, w] image.
pub fn act_on_image(
    group: &Group,
    g: GroupElement,
    image: &Tensor,
    mode: ResampleMode,
) -> Result<Tensor, GroupError> {
    if image.ndim() != 3 {
        return Err(GroupError::ImageActionInvalid {
            reason: "expected a [c, h, w] tensor",
        });
    }
    let (c, h, w) = (image.shape()[0], image.shape()[1], image.shape()[2]);
    let mut out = Tensor::zeros(image.shape());
    match mode {
        ResampleMode::Exact => {
            let map = exact_pixel_map(group, g, h, w)?;
            for ci in 0..c {
                let src = &image.data()[ci * h * w..(ci + 1) * h * w];
                let dst = &mut out.data_mut()[ci * h * w..(ci + 1) * h * w];
                for (d, &s) in dst.iter_mut().zip(map.iter()) {
                    *d = src[s];
                }
            }
        }
        ResampleMode::Bilinear { fill } => {
            let taps = bilinear_pixel_weights(group, g, h, w)?;
            for ci in 0..c {
                let src = &image.data()[ci * h * w..(ci + 1) * h * w];
                let dst = &mut out.data_mut()[ci * h * w..(ci + 1) * h * w];
                for (d, tap) in dst.iter_mut().zip(taps.iter()) {
                    let mut acc = 0.0;
                    let mut wsum = 0.0;
                    for &(s, wgt) in tap {
                        acc += wgt * src[s];
                        wsum += wgt;
                    }
                    *d = acc + (1.0 - wsum) * fill;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupKind};

    fn image(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Tensor {
        let mut t = Tensor::zeros(&[1, h, w]);
        for i in 0..h {
            for j in 0..w {
                t.set3(0, i, j, f(i, j));
            }
        }
        t
    }

    #[test]
    fn identity_is_identity() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let img = image(5, 5, |i, j| (i * 5 + j) as f64);
        let out = act_on_image(&g, g.identity(), &img, ResampleMode::Exact).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn rot90_twice_equals_rot180() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let img = image(5, 5, |i, j| (i * 7 + j * 3) as f64);
        let r1 = g.element(1);
        let once = act_on_image(&g, r1, &img, ResampleMode::Exact).unwrap();
        let twice = act_on_image(&g, r1, &once, ResampleMode::Exact).unwrap();
        let direct = act_on_image(&g, g.element(2), &img, ResampleMode::Exact).unwrap();
        assert_eq!(twice, direct);
    }

    #[test]
    fn exact_composition_law_holds_bit_exactly() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        let img = image(7, 7, |i, j| ((i * 31 + j * 17) % 13) as f64 - 6.0);
        for a in g.elements() {
            for b in g.elements() {
                let ab = g.compose(*a, *b);
                let path1 = act_on_image(
                    &g,
                    *a,
                    &act_on_image(&g, *b, &img, ResampleMode::Exact).unwrap(),
                    ResampleMode::Exact,
                )
                .unwrap();
                let path2 = act_on_image(&g, ab, &img, ResampleMode::Exact).unwrap();
                assert_eq!(path1, path2);
            }
        }
    }

    #[test]
    fn even_sizes_are_rejected() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let img = Tensor::zeros(&[1, 4, 5]);
        assert!(act_on_image(&g, g.element(1), &img, ResampleMode::Exact).is_err());
        assert!(
            act_on_image(&g, g.element(1), &img, ResampleMode::Bilinear { fill: 0.0 }).is_err()
        );
    }

    #[test]
    fn non_grid_elements_rejected_in_exact_mode() {
        let g = make_group(GroupKind::Cyclic, 8).unwrap();
        let img = Tensor::zeros(&[1, 5, 5]);
        assert!(act_on_image(&g, g.element(1), &img, ResampleMode::Exact).is_err());
        assert!(act_on_image(&g, g.element(2), &img, ResampleMode::Exact).is_ok());
    }

    #[test]
    fn rot45_fixes_radial_image_within_tolerance() {
        // A radially symmetric image is an analytic fixed point of any
        // rotation; the oracle is direct evaluation of the radial profile.
        let g = make_group(GroupKind::Cyclic, 8).unwrap();
        let (h, w) = (31, 31);
        let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
        let sigma = h as f64 / 5.0;
        let img = image(h, w, |i, j| {
            let r2 = (i as f64 - cy).powi(2) + (j as f64 - cx).powi(2);
            (-r2 / (2.0 * sigma * sigma)).exp()
        });
        let out =
            act_on_image(&g, g.element(1), &img, ResampleMode::Bilinear { fill: 0.0 }).unwrap();
        let interior = (h / 2 - 2) as f64;
        let mut worst = 0.0f64;
        for i in 0..h {
            for j in 0..w {
                let r = ((i as f64 - cy).powi(2) + (j as f64 - cx).powi(2)).sqrt();
                if r <= interior {
                    worst = worst.max((out.at3(0, i, j) - img.at3(0, i, j)).abs());
                }
            }
        }
        assert!(worst < 1e-2, "interior deviation {worst}");
    }

    #[test]
    fn d1_reflection_flips_rows() {
        // Reflection across the horizontal axis: (x, y) -> (x, -y).
        let g = make_group(GroupKind::Dihedral, 1).unwrap();
        let img = image(3, 3, |i, j| (i * 3 + j) as f64);
        let out = act_on_image(&g, g.element(1), &img, ResampleMode::Exact).unwrap();
        for j in 0..3 {
            assert_eq!(out.at3(0, 0, j), img.at3(0, 2, j));
            assert_eq!(out.at3(0, 1, j), img.at3(0, 1, j));
        }
    }
}
