use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Sample, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Stvqa,
    Textvqa,
    Toy,
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stvqa" => Ok(Source::Stvqa),
            "textvqa" => Ok(Source::Textvqa),
            "toy" => Ok(Source::Toy),
            _ => Err(Error::Unknown {
                what: "dataset",
                value: s.to_string(),
                expected: "stvqa, textvqa, toy".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub source: Source,
    pub samples: Vec<Sample>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn image_count(&self) -> usize {
        self.samples
            .iter()
            .map(|s| s.image_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn split(&self, split: Split) -> DatasetManifest {
        DatasetManifest {
            name: self.name.clone(),
            source: self.source,
            samples: self.samples.iter().filter(|s| s.split == split).cloned().collect(),
        }
    }

    /// Fraction of samples per answer word-count bucket `1, 2, 3, >3`.
    pub fn answer_length_fractions(&self) -> BTreeMap<&'static str, f64> {
        let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(crate::metrics::answer_bucket(s.answer_word_count())).or_default() += 1;
        }
        let n = self.samples.len().max(1) as f64;
        counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
    }

    /// One JSON record per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl(path: &Path, name: &str, source: Source) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut samples = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let sample: Sample = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })?;
            sample.validate().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })?;
            samples.push(sample);
        }
        Ok(DatasetManifest {
            name: name.to_string(),
            source,
            samples,
        })
    }
}

/// A record dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    /// Position of the record in the annotation file.
    pub record: usize,
    pub image_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub manifest: DatasetManifest,
    pub skipped: Vec<SkipEntry>,
}

impl Ingested {
    /// Skip counts per reason.
    pub fn skip_summary(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for s in &self.skipped {
            *m.entry(s.reason.clone()).or_default() += 1;
        }
        m
    }

    pub fn skipped_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.skipped {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        Ok(out)
    }
}
