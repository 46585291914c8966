//! Generator-backed membership oracles for the rotation-pair task.
//!
//! Samples are tracked as (scene, rotation class) with the image
//! transform applied symbolically: the commuting-square tests in
//! `render` justify identifying the rotated image with the render of
//! the rotated scene for the top-down cameras, and refute it for the
//! oblique pinhole and the fixed grid, which is exactly what the
//! membership answers encode.

use group_core::exact_cos_sin;
use symmetry_diagnostics::MembershipOracle;

use crate::pairs::{pair_label, CorruptionKind, LabeledImagePair, NUM_CLASSES};
use crate::scene::Scene;

/// A dataset pair with a C8 image rotation applied to both images.
#[derive(Debug, Clone)]
pub struct CoRotatedPair {
    pub scene_a: Scene,
    pub g_true: usize,
    /// Index of the applied C8 image rotation.
    pub applied: usize,
}

impl CoRotatedPair {
    pub fn from_pair(p: &LabeledImagePair) -> Self {
        CoRotatedPair {
            scene_a: p.scene_a.clone(),
            g_true: p.g_true,
            applied: 0,
        }
    }

    pub fn rotate(&self, steps: usize) -> Self {
        CoRotatedPair {
            scene_a: self.scene_a.clone(),
            g_true: self.g_true,
            applied: (self.applied + steps) % NUM_CLASSES,
        }
    }
}

/// Answers membership and true labels analytically from the generator's
/// own semantics.
pub struct PairGeneratorOracle {
    pub corruption: CorruptionKind,
}

impl MembershipOracle<CoRotatedPair> for PairGeneratorOracle {
    fn lookup(&self, p: &CoRotatedPair) -> Option<usize> {
        match self.corruption {
            CorruptionKind::None | CorruptionKind::InvertLabel => {
                // Rotating both top-down images reproduces the renders of
                // the co-rotated scenes, which are themselves valid draws:
                // the scene distribution is rotation invariant. The true
                // label applies the inversion predicate to the rotated
                // first scene.
                let (c, s) = exact_cos_sin(p.applied, NUM_CLASSES);
                let rotated = p.scene_a.rotated(c, s);
                Some(pair_label(self.corruption, &rotated, p.g_true))
            }
            CorruptionKind::Oblique { .. } | CorruptionKind::FixedBackgroundGrid => {
                // Any non-identity image rotation leaves the render set:
                // perspective foreshortening (or the fixed grid) pins the
                // image frame.
                (p.applied == 0).then(|| pair_label(self.corruption, &p.scene_a, p.g_true))
            }
        }
    }
}
