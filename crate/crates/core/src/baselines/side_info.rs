//! Per-image object tags and captions consumed by the baselines.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SideRecord {
    pub tags: Vec<String>,
    /// Tokenized caption.
    pub caption: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SideLine {
    image_id: String,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    caption: String,
}

/// Side information keyed by image id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SideInfo {
    records: BTreeMap<String, SideRecord>,
}

impl SideInfo {
    pub fn insert(&mut self, image_id: impl Into<String>, record: SideRecord) {
        self.records.insert(image_id.into(), record);
    }

    pub fn get(&self, image_id: &str) -> Option<&SideRecord> {
        self.records.get(image_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Adds every record of `other`, replacing records with the same id.
    pub fn extend(&mut self, other: SideInfo) {
        self.records.extend(other.records);
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Reads JSONL `{image_id, tags: [..], caption: ".."}`. Tags are
    /// lowercased; captions go through the shared tokenizer.
    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut side = SideInfo::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: SideLine = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })?;
            side.insert(
                l.image_id,
                SideRecord {
                    tags: l.tags.iter().map(|t| t.to_lowercase()).collect(),
                    caption: tokenize(&l.caption),
                },
            );
        }
        Ok(side)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (id, r) in &self.records {
            let line = SideLine {
                image_id: id.clone(),
                tags: r.tags.clone(),
                caption: r.caption.join(" "),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("side.jsonl");
        fs::write(&p, "{\"image_id\":\"x\",\"tags\":[\"Aircraft\"],\"caption\":\"A plane on a runway.\"}\n").unwrap();
        let side = SideInfo::read_jsonl(&p).unwrap();
        let r = side.get("x").unwrap();
        assert_eq!(r.tags, vec!["aircraft"]);
        assert_eq!(r.caption, tokenize("a plane on a runway ."));
        side.write_jsonl(&p).unwrap();
        assert_eq!(SideInfo::read_jsonl(&p).unwrap(), side);
        fs::write(&p, "{}\n").unwrap();
        assert!(SideInfo::read_jsonl(&p).unwrap_err().to_string().contains("line 1"));
    }
}
