//! Binary checkpoint layout:
//!
//! ```text
//! magic    8 bytes   b"CDBCKPT\0"
//! version  u32 LE    currently 1
//! length   u64 LE    byte length of the manifest
//! manifest JSON      {"meta": {..}, "tensors": [{"name", "shape", "dtype", "offset"}]}
//! buffer   raw       little-endian f64 values; `offset` counts bytes from buffer start
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ParamStore, Tensor};

const MAGIC: &[u8; 8] = b"CDBCKPT\0";
const VERSION: u32 = 1;
const DTYPE: &str = "f64";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("malformed manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    shape: Vec<usize>,
    dtype: String,
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    meta: BTreeMap<String, String>,
    tensors: Vec<ManifestEntry>,
}

/// Parameters plus free-form string metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ParamStore,
    pub meta: BTreeMap<String, String>,
}

pub fn write_checkpoint<W: Write>(
    mut w: W,
    store: &ParamStore,
    meta: &BTreeMap<String, String>,
) -> Result<(), CheckpointError> {
    let mut offset = 0u64;
    let tensors = store
        .iter()
        .map(|p| {
            let e = ManifestEntry {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                dtype: DTYPE.to_string(),
                offset,
            };
            offset += (p.value.numel() * 8) as u64;
            e
        })
        .collect();
    let manifest = serde_json::to_vec(&Manifest {
        meta: meta.clone(),
        tensors,
    })
    .map_err(|e| CheckpointError::Manifest(e.to_string()))?;

    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(manifest.len() as u64).to_le_bytes())?;
    w.write_all(&manifest)?;
    for p in store.iter() {
        for v in p.value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint, CheckpointError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut manifest = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut manifest)?;
    let manifest: Manifest =
        serde_json::from_slice(&manifest).map_err(|e| CheckpointError::Manifest(e.to_string()))?;

    let mut buffer = Vec::new();
    r.read_to_end(&mut buffer)?;
    let mut store = ParamStore::new();
    for entry in manifest.tensors {
        if entry.dtype != DTYPE {
            return Err(CheckpointError::Manifest(format!(
                "{}: unsupported dtype {}",
                entry.name, entry.dtype
            )));
        }
        let numel: usize = entry.shape.iter().product();
        let start = entry.offset as usize;
        let end = start + numel * 8;
        let bytes = buffer.get(start..end).ok_or_else(|| {
            CheckpointError::Manifest(format!("{}: buffer too short", entry.name))
        })?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let tensor = Tensor::from_vec(entry.shape, data)
            .map_err(|e| CheckpointError::Manifest(e.to_string()))?;
        store.add(entry.name, tensor, true);
    }
    Ok(Checkpoint {
        params: store,
        meta: manifest.meta,
    })
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    store: &ParamStore,
    meta: &BTreeMap<String, String>,
) -> Result<(), CheckpointError> {
    write_checkpoint(BufWriter::new(File::create(path)?), store, meta)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, CheckpointError> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut store = ParamStore::new();
        store.add(
            "a",
            Tensor::matrix(2, 2, vec![1.0, -0.0, f64::MIN_POSITIVE, 3.5]).unwrap(),
            true,
        );
        store.add("b", Tensor::vector(vec![1e-300, -7.25]), false);
        let mut meta = BTreeMap::new();
        meta.insert("step".to_string(), "12".to_string());

        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &store, &meta).unwrap();
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back.meta, meta);
        for (x, y) in store.iter().zip(back.params.iter()) {
            assert_eq!(x.name, y.name);
            let xb: Vec<u64> = x.value.data().iter().map(|v| v.to_bits()).collect();
            let yb: Vec<u64> = y.value.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(xb, yb);
        }

        let mut again = Vec::new();
        write_checkpoint(&mut again, &back.params, &back.meta).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn rejects_wrong_magic_and_version() {
        assert!(matches!(
            read_checkpoint(&b"NOTACKPT\x01\0\0\0"[..]),
            Err(CheckpointError::BadMagic)
        ));
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&9u32.to_le_bytes());
        assert!(matches!(
            read_checkpoint(bytes.as_slice()),
            Err(CheckpointError::Version(9))
        ));
    }
}
