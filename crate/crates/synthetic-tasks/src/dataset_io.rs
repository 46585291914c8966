//! Dataset files: one little-endian f64 blob holding every image tensor
//! (image_a then image_b per sample, sample-major) plus a JSON sidecar
//! with labels, splits, corruption, seed, and the scenes themselves so
//! generator-backed oracles can be rebuilt from disk.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tensor_autodiff::Tensor;

use crate::pairs::{CorruptionKind, LabeledImagePair, PairSetConfig, RotationPairSet};
use crate::scene::Scene;
use crate::TaskError;

pub const GENERATOR_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: u32,
    pub n: usize,
    pub shape: Vec<usize>,
    pub labels: Vec<usize>,
    pub g_true: Vec<usize>,
    pub corruption: CorruptionKind,
    pub seed: u64,
    pub config: PairSetConfig,
    pub splits: Splits,
    pub scenes: Vec<Scene>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn io_err(e: std::io::Error) -> TaskError {
    TaskError::Io(e.to_string())
}

pub fn save_pairs(set: &RotationPairSet, dir: &Path, stem: &str) -> Result<(), TaskError> {
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut blob: Vec<u8> = Vec::new();
    for s in &set.samples {
        for t in [&s.image_a, &s.image_b] {
            for v in t.data() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::File::create(dir.join(format!("{stem}.bin")))
        .map_err(io_err)?
        .write_all(&blob)
        .map_err(io_err)?;
    let sidecar = Sidecar {
        version: GENERATOR_VERSION,
        n: set.samples.len(),
        shape: set.samples[0].image_a.shape().to_vec(),
        labels: set.samples.iter().map(|s| s.label).collect(),
        g_true: set.samples.iter().map(|s| s.g_true).collect(),
        corruption: set.config.corruption,
        seed: set.config.seed,
        config: set.config,
        splits: Splits {
            train: set.train_idx.clone(),
            val: set.val_idx.clone(),
            test: set.test_idx.clone(),
        },
        scenes: set.samples.iter().map(|s| s.scene_a.clone()).collect(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(dir.join(format!("{stem}.json")), json).map_err(io_err)
}

pub fn load_pairs(dir: &Path, stem: &str) -> Result<RotationPairSet, TaskError> {
    let sidecar: Sidecar = serde_json::from_str(
        &fs::read_to_string(dir.join(format!("{stem}.json"))).map_err(io_err)?,
    )
    .map_err(|e| TaskError::Io(format!("sidecar parse: {e}")))?;
    if sidecar.version != GENERATOR_VERSION {
        return Err(TaskError::Io(format!(
            "unsupported dataset version {}",
            sidecar.version
        )));
    }
    let mut blob = Vec::new();
    fs::File::open(dir.join(format!("{stem}.bin")))
        .map_err(io_err)?
        .read_to_end(&mut blob)
        .map_err(io_err)?;
    let image_len: usize = sidecar.shape.iter().product();
    let expected = sidecar.n * 2 * image_len * 8;
    if blob.len() != expected {
        return Err(TaskError::Io(format!(
            "blob length {} does not match sidecar ({expected})",
            blob.len()
        )));
    }
    let mut samples = Vec::with_capacity(sidecar.n);
    for i in 0..sidecar.n {
        let mut images = Vec::with_capacity(2);
        for half in 0..2 {
            let start = (i * 2 + half) * image_len * 8;
            let data: Vec<f64> = blob[start..start + image_len * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            images.push(Tensor::from_vec(&sidecar.shape, data).map_err(|e| {
                TaskError::Io(format!("tensor rebuild: {e}"))
            })?);
        }
        let image_b = images.pop().unwrap();
        let image_a = images.pop().unwrap();
        samples.push(LabeledImagePair {
            image_a,
            image_b,
            label: sidecar.labels[i],
            g_true: sidecar.g_true[i],
            scene_a: sidecar.scenes[i].clone(),
        });
    }
    Ok(RotationPairSet {
        config: sidecar.config,
        samples,
        train_idx: sidecar.splits.train,
        val_idx: sidecar.splits.val,
        test_idx: sidecar.splits.test,
    })
}
