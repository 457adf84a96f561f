use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sample::OcrToken;

const NGRAM_MIN: usize = 3;
const NGRAM_MAX: usize = 5;
const BUCKETS: u64 = 1 << 21;
const DEFAULT_SEED: u64 = 0x005e_ed0f_7e47;

/// Pretrained word vectors with a subword fallback for unseen words.
///
/// Words missing from the table get the mean of hashed character 3-5-gram
/// vectors (the word is wrapped in `<` `>` first), each drawn from a
/// generator keyed by `(seed, bucket)`. The fallback is a pure function of
/// the word string.
#[derive(Debug, Clone)]
pub struct WordVectorTable {
    dim: usize,
    seed: u64,
    vectors: HashMap<String, Vec<f64>>,
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl WordVectorTable {
    pub fn new(dim: usize) -> Self {
        Self::with_seed(dim, DEFAULT_SEED)
    }

    pub fn with_seed(dim: usize, seed: u64) -> Self {
        WordVectorTable {
            dim,
            seed,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: impl Into<String>, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "word vector has {} entries, table dim is {}",
                v.len(),
                self.dim
            )));
        }
        self.vectors.insert(word.into(), v);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    /// Stored vector, or the subword fallback.
    pub fn vector(&self, word: &str) -> Vec<f64> {
        match self.get(word) {
            Some(v) => v.to_vec(),
            None => self.fallback(word),
        }
    }

    pub fn fallback(&self, word: &str) -> Vec<f64> {
        let wrapped: Vec<char> = format!("<{word}>").chars().collect();
        let mut acc = vec![0.0; self.dim];
        let mut count = 0usize;
        for n in NGRAM_MIN..=NGRAM_MAX {
            if wrapped.len() < n {
                break;
            }
            for start in 0..=wrapped.len() - n {
                let gram: String = wrapped[start..start + n].iter().collect();
                let bucket = fnv1a(&gram) % BUCKETS;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ bucket.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                for a in acc.iter_mut() {
                    *a += rng.gen_range(-1.0..1.0);
                }
                count += 1;
            }
        }
        if count > 0 {
            let inv = 1.0 / count as f64;
            acc.iter_mut().for_each(|a| *a *= inv);
        }
        acc
    }

    /// Reads the text format: a `count dim` header, then `word v1 .. vdim`
    /// per line.
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            location: format!("line {line}"),
            message,
        };
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))?
            .map_err(|e| Error::io(path, e))?;
        let mut parts = header.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be 'count dim'".into()))?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be 'count dim'".into()))?;
        let mut table = WordVectorTable::new(dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line");
            let v: Vec<f64> = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(i + 2, e.to_string()))?;
            if v.len() != dim {
                return Err(parse_err(i + 2, format!("expected {dim} values, found {}", v.len())));
            }
            table.vectors.insert(word.to_string(), v);
        }
        if table.len() != count {
            return Err(parse_err(1, format!("header declares {count} words, file has {}", table.len())));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", words.len(), self.dim).map_err(io)?;
        for word in words {
            write!(w, "{word}").map_err(io)?;
            for v in &self.vectors[word] {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// One vector per normalized word of the token.
pub fn embed_token_words(token: &OcrToken, table: &WordVectorTable) -> Vec<Vec<f64>> {
    token.words().iter().map(|w| table.vector(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::BoxGeometry;

    fn tok(text: &str) -> OcrToken {
        OcrToken::new(text, BoxGeometry::axis_aligned(0.0, 0.0, 1.0, 1.0))
    }

    #[test]
    fn stored_words_are_looked_up() {
        let mut t = WordVectorTable::new(3);
        t.insert("inta", vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(embed_token_words(&tok("INTA"), &t), vec![vec![1.0, 2.0, 3.0]]);
        assert!(t.insert("bad", vec![1.0]).is_err());
    }

    #[test]
    fn fallback_is_deterministic_and_word_specific() {
        let t = WordVectorTable::new(300);
        let a = embed_token_words(&tok("EC-634"), &t);
        let b = embed_token_words(&tok("ec-634"), &WordVectorTable::new(300));
        assert_eq!(a, b);
        assert_eq!(a[0].len(), 300);
        assert_ne!(t.fallback("ec-634"), t.fallback("ec-635"));
        assert!(a[0].iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn shared_subwords_bring_vectors_closer() {
        let t = WordVectorTable::new(300);
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let base = t.fallback("pepsicola");
        assert!(dist(&base, &t.fallback("pepsicolas")) < dist(&base, &t.fallback("zxqvbnmlk")));
    }

    #[test]
    fn one_vector_per_word() {
        let t = WordVectorTable::new(4);
        assert_eq!(embed_token_words(&tok("stop sign"), &t).len(), 2);
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = WordVectorTable::new(2);
        t.insert("b", vec![0.5, -1.25]).unwrap();
        t.insert("a", vec![3.0, 4.0]).unwrap();
        let p = dir.path().join("vec.txt");
        t.write(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "2 2\na 3 4\nb 0.5 -1.25\n");
        let back = WordVectorTable::read(&p).unwrap();
        assert_eq!(back.get("b"), Some(&[0.5, -1.25][..]));

        std::fs::write(&p, "1 3\nx 1 2\n").unwrap();
        let err = WordVectorTable::read(&p).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }
}
