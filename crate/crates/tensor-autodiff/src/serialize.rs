//! Model parameter persistence: a flat little-endian f64 blob plus a
//! JSON manifest describing entry names, shapes, and arbitrary
//! metadata supplied by the caller (layer structure, group info, ...).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::tensor::Tensor;
use crate::TensorError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub entries: Vec<ManifestEntry>,
    pub metadata: Value,
}

pub const BLOB_FORMAT: &str = "f64-le-v1";

pub fn save_params(
    dir: &Path,
    stem: &str,
    named: &[(String, &Tensor)],
    metadata: Value,
) -> Result<(), TensorError> {
    fs::create_dir_all(dir).map_err(|e| TensorError::Io(e.to_string()))?;
    let mut entries = Vec::new();
    let mut blob: Vec<u8> = Vec::new();
    let mut offset = 0usize;
    for (name, t) in named {
        entries.push(ManifestEntry {
            name: name.clone(),
            shape: t.shape().to_vec(),
            offset,
            len: t.len(),
        });
        for v in t.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
        offset += t.len();
    }
    let manifest = Manifest {
        format: BLOB_FORMAT.to_string(),
        entries,
        metadata,
    };
    let mut f = fs::File::create(dir.join(format!("{stem}.bin")))
        .map_err(|e| TensorError::Io(e.to_string()))?;
    f.write_all(&blob).map_err(|e| TensorError::Io(e.to_string()))?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join(format!("{stem}.json")), json)
        .map_err(|e| TensorError::Io(e.to_string()))?;
    Ok(())
}

pub fn load_params(dir: &Path, stem: &str) -> Result<(Vec<(String, Tensor)>, Value), TensorError> {
    let manifest: Manifest = serde_json::from_str(
        &fs::read_to_string(dir.join(format!("{stem}.json")))
            .map_err(|e| TensorError::Io(e.to_string()))?,
    )
    .map_err(|e| TensorError::Io(format!("manifest parse: {e}")))?;
    if manifest.format != BLOB_FORMAT {
        return Err(TensorError::Io(format!(
            "unsupported blob format {}",
            manifest.format
        )));
    }
    let mut blob = Vec::new();
    fs::File::open(dir.join(format!("{stem}.bin")))
        .map_err(|e| TensorError::Io(e.to_string()))?
        .read_to_end(&mut blob)
        .map_err(|e| TensorError::Io(e.to_string()))?;
    let mut out = Vec::new();
    for e in &manifest.entries {
        let start = e.offset * 8;
        let end = start + e.len * 8;
        if end > blob.len() {
            return Err(TensorError::Io(format!("blob truncated at entry {}", e.name)));
        }
        let data: Vec<f64> = blob[start..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push((e.name.clone(), Tensor::from_vec(&e.shape, data)?));
    }
    Ok((out, manifest.metadata))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = std::env::temp_dir().join("tad-serialize-test");
        let a = Tensor::from_vec(&[2, 3], vec![1.0, -2.5, 3.25, 0.0, 1e-300, f64::MAX]).unwrap();
        let b = Tensor::scalar(0.125);
        save_params(
            &dir,
            "model",
            &[("conv.w".to_string(), &a), ("head.b".to_string(), &b)],
            serde_json::json!({"group": "c8"}),
        )
        .unwrap();
        let (loaded, meta) = load_params(&dir, "model").unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].1, a);
        assert_eq!(loaded[1].1, b);
        assert_eq!(meta["group"], "c8");
    }
}
