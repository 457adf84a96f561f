//! Two-file feature store: `index.json` plus a little-endian float32
//! `features.bin` payload.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INDEX_FILE: &str = "index.json";
pub const PAYLOAD_FILE: &str = "features.bin";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub image_id: String,
    /// Offset into the payload, in floats.
    pub offset: usize,
    /// Record length, in floats.
    pub length: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreIndex {
    dim: usize,
    records: Vec<StoreRecord>,
}

/// Fixed-width float vectors keyed by image id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    records: Vec<StoreRecord>,
    lookup: HashMap<String, usize>,
    payload: Vec<f32>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Self {
        FeatureStore {
            dim,
            records: Vec::new(),
            lookup: HashMap::new(),
            payload: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[StoreRecord] {
        &self.records
    }

    pub fn payload(&self) -> &[f32] {
        &self.payload
    }

    pub fn insert(&mut self, image_id: impl Into<String>, values: &[f32]) -> Result<()> {
        let image_id = image_id.into();
        if values.len() != self.dim {
            return Err(Error::Dimension(format!(
                "feature for {image_id} has {} values, store dim is {}",
                values.len(),
                self.dim
            )));
        }
        if self.lookup.contains_key(&image_id) {
            return Err(Error::Invalid(format!("duplicate feature record for {image_id}")));
        }
        self.lookup.insert(image_id.clone(), self.records.len());
        self.records.push(StoreRecord {
            image_id,
            offset: self.payload.len(),
            length: values.len(),
        });
        self.payload.extend_from_slice(values);
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<&[f32]> {
        let r = &self.records[*self.lookup.get(image_id)?];
        Some(&self.payload[r.offset..r.offset + r.length])
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.lookup.contains_key(image_id)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let index = StoreIndex {
            dim: self.dim,
            records: self.records.clone(),
        };
        let index_path = dir.join(INDEX_FILE);
        let json = serde_json::to_string_pretty(&index)?;
        fs::write(&index_path, json + "\n").map_err(|e| Error::io(&index_path, e))?;
        write_f32_le(&dir.join(PAYLOAD_FILE), &self.payload)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let index_path = dir.join(INDEX_FILE);
        let text = fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
        let index: StoreIndex = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: index_path.clone(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })?;
        let payload = read_f32_le(&dir.join(PAYLOAD_FILE))?;

        let mut spans: Vec<(usize, usize)> = Vec::with_capacity(index.records.len());
        let mut lookup = HashMap::with_capacity(index.records.len());
        for (i, r) in index.records.iter().enumerate() {
            if r.length != index.dim {
                return Err(Error::Integrity(format!(
                    "record {} has length {}, index dim is {}",
                    r.image_id, r.length, index.dim
                )));
            }
            if r.offset + r.length > payload.len() {
                return Err(Error::Integrity(format!(
                    "record {} spans [{}, {}) but payload holds {} floats",
                    r.image_id,
                    r.offset,
                    r.offset + r.length,
                    payload.len()
                )));
            }
            if lookup.insert(r.image_id.clone(), i).is_some() {
                return Err(Error::Integrity(format!("duplicate record {}", r.image_id)));
            }
            spans.push((r.offset, r.offset + r.length));
        }
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::Integrity("overlapping feature records".into()));
        }
        let covered: usize = spans.iter().map(|(a, b)| b - a).sum();
        if covered != payload.len() {
            return Err(Error::Integrity(format!(
                "index covers {covered} floats, payload holds {}",
                payload.len()
            )));
        }
        Ok(FeatureStore {
            dim: index.dim,
            records: index.records,
            lookup,
            payload,
        })
    }
}

pub(crate) fn write_f32_le(path: &Path, values: &[f32]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_f32_le(path: &Path) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Integrity(format!(
            "{} has {} bytes, not a whole number of float32 values",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> FeatureStore {
        let mut s = FeatureStore::new(2);
        s.insert("a", &[1.0, -2.5]).unwrap();
        s.insert("b", &[f32::MIN_POSITIVE, 3.25e-7]).unwrap();
        s.insert("c", &[0.0, -0.0]).unwrap();
        s
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let s = three();
        s.write(dir.path()).unwrap();
        let back = FeatureStore::read(dir.path()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.get("c").unwrap()[1].to_bits(), (-0.0f32).to_bits());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        three().write(dir.path()).unwrap();
        let p = dir.path().join(PAYLOAD_FILE);
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(FeatureStore::read(dir.path()), Err(Error::Integrity(_))));
        fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(FeatureStore::read(dir.path()), Err(Error::Integrity(_))));
    }

    #[test]
    fn wrong_record_length_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        three().write(dir.path()).unwrap();
        let p = dir.path().join(INDEX_FILE);
        let text = fs::read_to_string(&p).unwrap().replace("\"dim\": 2", "\"dim\": 3");
        fs::write(&p, text).unwrap();
        assert!(matches!(FeatureStore::read(dir.path()), Err(Error::Integrity(_))));
    }

    #[test]
    fn empty_store_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        FeatureStore::new(512).write(dir.path()).unwrap();
        let back = FeatureStore::read(dir.path()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 512);
    }

    #[test]
    fn insert_checks_dim_and_duplicates() {
        let mut s = FeatureStore::new(2);
        assert!(s.insert("a", &[1.0]).is_err());
        s.insert("a", &[1.0, 2.0]).unwrap();
        assert!(s.insert("a", &[1.0, 2.0]).is_err());
    }
}
