//! Rotation-estimation image pairs: the second image is the first
//! scene with every marker pose rotated about the workspace center by
//! an element of C8, and the label is that element's class index.

use group_core::exact_cos_sin;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::{derive_seed, seeded};
use tensor_autodiff::Tensor;

use crate::render::{render_scene, scene_fits, Camera};
use crate::scene::{sample_scene, Scene};
use crate::TaskError;

pub const NUM_CLASSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorruptionKind {
    /// Plain top-down view.
    None,
    /// Pinhole camera tilted to the given elevation angle.
    Oblique { view_angle_deg: f64 },
    /// Top-down view, but the label flips to -g whenever the yellow
    /// marker starts left of the orange marker in the world frame.
    InvertLabel,
    /// Top-down view over a grid pattern fixed in the image frame.
    FixedBackgroundGrid,
}

impl CorruptionKind {
    pub fn camera(&self) -> Camera {
        match self {
            CorruptionKind::Oblique { view_angle_deg } => Camera::Oblique {
                view_angle_deg: *view_angle_deg,
            },
            _ => Camera::TopDown,
        }
    }

    pub fn background_grid(&self) -> bool {
        matches!(self, CorruptionKind::FixedBackgroundGrid)
    }
}

#[derive(Debug, Clone)]
pub struct LabeledImagePair {
    pub image_a: Tensor,
    pub image_b: Tensor,
    pub label: usize,
    pub g_true: usize,
    pub scene_a: Scene,
}

impl LabeledImagePair {
    /// Stacks the pair channelwise into a [8, h, w] network input.
    pub fn stacked(&self) -> Tensor {
        let (h, w) = (self.image_a.shape()[1], self.image_a.shape()[2]);
        let mut data = Vec::with_capacity(8 * h * w);
        data.extend_from_slice(self.image_a.data());
        data.extend_from_slice(self.image_b.data());
        Tensor::from_vec(&[8, h, w], data).unwrap()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairSetConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub px: usize,
    pub corruption: CorruptionKind,
    pub seed: u64,
}

impl Default for PairSetConfig {
    fn default() -> Self {
        PairSetConfig {
            n_train: 200,
            n_val: 100,
            n_test: 100,
            px: 39,
            corruption: CorruptionKind::None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RotationPairSet {
    pub config: PairSetConfig,
    pub samples: Vec<LabeledImagePair>,
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

/// The true label of a pair: the rotation class, inverted under the
/// invert-label corruption when the predicate fires on the first scene.
pub fn pair_label(corruption: CorruptionKind, scene_a: &Scene, g_true: usize) -> usize {
    match corruption {
        CorruptionKind::InvertLabel if scene_a.yellow_left_of_orange() => {
            (NUM_CLASSES - g_true) % NUM_CLASSES
        }
        _ => g_true,
    }
}

/// Class sequence for one split: balanced within +-1 and shuffled.
fn balanced_classes(n: usize, seed: u64) -> Vec<usize> {
    let mut classes: Vec<usize> = (0..n).map(|i| i % NUM_CLASSES).collect();
    classes.shuffle(&mut seeded(seed));
    classes
}

fn generate_sample(
    corruption: CorruptionKind,
    px: usize,
    g_true: usize,
    sample_seed: u64,
) -> Result<LabeledImagePair, TaskError> {
    let camera = corruption.camera();
    let grid = corruption.background_grid();
    let mut rng = seeded(sample_seed);
    let (co, si) = exact_cos_sin(g_true, NUM_CLASSES);
    for _ in 0..100 {
        let scene_a = sample_scene(&mut rng);
        let scene_b = scene_a.rotated(co, si);
        if !scene_fits(&scene_a, camera, px) || !scene_fits(&scene_b, camera, px) {
            continue;
        }
        let image_a = render_scene(&scene_a, camera, px, grid)?;
        let image_b = render_scene(&scene_b, camera, px, grid)?;
        let label = pair_label(corruption, &scene_a, g_true);
        return Ok(LabeledImagePair {
            image_a,
            image_b,
            label,
            g_true,
            scene_a,
        });
    }
    Err(TaskError::BadConfig {
        reason: "could not sample a scene fitting the frame",
    })
}

/// Generates the three-way split. Pure function of the config: every
/// sample derives its own RNG stream from (seed, split, index).
pub fn make_rotation_pairs(config: PairSetConfig) -> Result<RotationPairSet, TaskError> {
    let splits = [
        (0u64, config.n_train),
        (1u64, config.n_val),
        (2u64, config.n_test),
    ];
    let mut samples = Vec::with_capacity(config.n_train + config.n_val + config.n_test);
    let mut indices: Vec<Vec<usize>> = Vec::with_capacity(3);
    for (split_id, n) in splits {
        let classes = balanced_classes(n, derive_seed(config.seed, 1_000_000 + split_id));
        let mut idx = Vec::with_capacity(n);
        for (i, &g_true) in classes.iter().enumerate() {
            let sample_seed = derive_seed(config.seed, split_id * 1_000_003 + i as u64);
            let pair = generate_sample(config.corruption, config.px, g_true, sample_seed)?;
            idx.push(samples.len());
            samples.push(pair);
        }
        indices.push(idx);
    }
    let mut it = indices.into_iter();
    Ok(RotationPairSet {
        config,
        samples,
        train_idx: it.next().unwrap(),
        val_idx: it.next().unwrap(),
        test_idx: it.next().unwrap(),
    })
}
