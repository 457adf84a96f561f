//! Parameter files in the feature-store layout: `params.bin` holds every
//! weight as little-endian float32, `params.json` indexes it by tensor name.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{read_f32_le, write_f32_le};
use crate::error::{Error, Result};
use crate::nn::Tensors;
use crate::text::Vocabulary;

pub const PARAMS_FILE: &str = "params.bin";
pub const PARAMS_INDEX_FILE: &str = "params.json";
pub const CONFIG_FILE: &str = "config.json";
pub const VOCAB_FILE: &str = "vocab.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Offset into `params.bin`, in floats.
    pub offset: usize,
    pub length: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsIndex {
    tensors: Vec<TensorRecord>,
}

pub fn write_params<T: Tensors>(dir: &Path, params: &T) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut payload: Vec<f32> = Vec::with_capacity(params.param_count());
    let mut tensors = Vec::new();
    for (name, m) in params.named() {
        tensors.push(TensorRecord {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
            offset: payload.len(),
            length: m.len(),
        });
        payload.extend(m.iter().map(|&v| v as f32));
    }
    write_json(&dir.join(PARAMS_INDEX_FILE), &ParamsIndex { tensors })?;
    write_f32_le(&dir.join(PARAMS_FILE), &payload)
}

/// Loads weights into `params`, whose tensor names and shapes must match
/// the stored index exactly.
pub fn read_params<T: Tensors>(dir: &Path, params: &mut T) -> Result<()> {
    let index: ParamsIndex = read_json(&dir.join(PARAMS_INDEX_FILE))?;
    let payload = read_f32_le(&dir.join(PARAMS_FILE))?;
    let expected: Vec<(String, usize, usize)> = params
        .named()
        .into_iter()
        .map(|(n, m)| (n, m.nrows(), m.ncols()))
        .collect();
    if expected.len() != index.tensors.len() {
        return Err(Error::Integrity(format!(
            "checkpoint holds {} tensors, model has {}",
            index.tensors.len(),
            expected.len()
        )));
    }
    let mut end = 0;
    for (rec, (name, rows, cols)) in index.tensors.iter().zip(&expected) {
        if rec.name != *name || rec.rows != *rows || rec.cols != *cols {
            return Err(Error::Integrity(format!(
                "checkpoint tensor {} is {}x{}, model expects {name} {rows}x{cols}",
                rec.name, rec.rows, rec.cols
            )));
        }
        if rec.length != rows * cols || rec.offset != end {
            return Err(Error::Integrity(format!("tensor {} has an inconsistent span", rec.name)));
        }
        end += rec.length;
    }
    if end != payload.len() {
        return Err(Error::Integrity(format!(
            "index covers {end} floats, {PARAMS_FILE} holds {}",
            payload.len()
        )));
    }
    let mut records = index.tensors.iter();
    params.visit_mut(&mut |m| {
        let r = records.next().expect("count checked");
        let src = &payload[r.offset..r.offset + r.length];
        m.iter_mut().zip(src).for_each(|(d, &s)| *d = f64::from(s));
    });
    Ok(())
}

/// Rounds every weight to float32, so an in-memory model matches what a
/// checkpoint reload would produce.
pub fn round_to_f32<T: Tensors>(params: &mut T) {
    params.visit_mut(&mut |m| m.mapv_inplace(|v| f64::from(v as f32)));
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    write_json(path, vocab)
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    read_json(path)
}
