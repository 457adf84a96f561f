use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::{bleu_corpus_up_to, meteor, rouge_l, sentence_bleu, EvalPair};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Answer word-count slices, in report order.
pub const ANSWER_BUCKETS: [&str; 4] = ["1", "2", "3", ">3"];
const HEADLINE_N: usize = 4;

pub fn answer_bucket(answer_words: usize) -> &'static str {
    match answer_words {
        0 | 1 => "1",
        2 => "2",
        3 => "3",
        _ => ">3",
    }
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub image_id: String,
    pub ocr_text: String,
    pub generated: String,
    /// Accepts either `references: [..]` or a single `reference: ".."`.
    #[serde(alias = "reference", deserialize_with = "one_or_many")]
    pub references: Vec<String>,
    pub answer_word_count: usize,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

impl PredictionRow {
    pub fn pair(&self) -> Result<EvalPair> {
        EvalPair::new(tokenize(&self.generated), self.references.iter().map(|r| tokenize(r)).collect())
            .map_err(|_| Error::Invalid(format!("prediction for {} has no reference", self.image_id)))
    }

    pub fn read_jsonl(path: &Path) -> Result<Vec<PredictionRow>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: PredictionRow = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })?;
            if row.references.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    location: format!("line {}", i + 1),
                    message: "row has no reference question".into(),
                });
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Invalid(format!("{} holds no predictions", path.display())));
        }
        Ok(rows)
    }

    pub fn write_jsonl(rows: &[PredictionRow], path: &Path) -> Result<()> {
        let mut out = String::new();
        for r in rows {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub count: usize,
    /// Corpus BLEU-4.
    pub bleu: f64,
    /// Corpus BLEU-1 through BLEU-4.
    pub bleu_n: Vec<f64>,
    /// Mean sentence METEOR.
    pub meteor: f64,
    /// Mean sentence ROUGE-L.
    pub rouge_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceScores {
    pub bucket: String,
    /// Share of the corpus falling in this bucket.
    pub fraction: f64,
    pub scores: CorpusScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub image_id: String,
    pub ocr_text: String,
    pub candidate: String,
    pub references: Vec<String>,
    pub answer_word_count: usize,
    /// Smoothed sentence BLEU-4.
    pub bleu: f64,
    pub meteor: f64,
    pub rouge_l: f64,
    pub exact_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus: CorpusScores,
    pub slices: Vec<SliceScores>,
    pub samples: Vec<SampleScore>,
}

fn corpus_scores(pairs: &[EvalPair], meteors: &[f64], rouges: &[f64]) -> CorpusScores {
    // An empty slice scores 0 everywhere; skipping the call avoids the
    // empty-corpus warning for buckets a split simply does not have.
    let bleu_n = if pairs.is_empty() {
        vec![0.0; HEADLINE_N]
    } else {
        bleu_corpus_up_to(pairs, HEADLINE_N)
    };
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    CorpusScores {
        count: pairs.len(),
        bleu: bleu_n[HEADLINE_N - 1],
        bleu_n,
        meteor: mean(meteors),
        rouge_l: mean(rouges),
    }
}

fn best_over_refs(pair: &EvalPair, f: fn(&[String], &[String]) -> f64) -> f64 {
    pair.references.iter().map(|r| f(&pair.candidate, r)).fold(0.0, f64::max)
}

struct Meta {
    image_id: String,
    ocr_text: String,
    references: Vec<String>,
}

fn build(pairs: &[EvalPair], counts: &[usize], meta: Vec<Meta>) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::Invalid("cannot evaluate an empty corpus".into()));
    }
    if pairs.len() != counts.len() {
        return Err(Error::Invalid(format!(
            "{} pairs but {} answer word counts",
            pairs.len(),
            counts.len()
        )));
    }
    let meteors: Vec<f64> = pairs.iter().map(|p| best_over_refs(p, meteor)).collect();
    let rouges: Vec<f64> = pairs.iter().map(|p| best_over_refs(p, rouge_l)).collect();
    let corpus = corpus_scores(pairs, &meteors, &rouges);

    let slices = ANSWER_BUCKETS
        .iter()
        .map(|&bucket| {
            let idx: Vec<usize> = (0..pairs.len()).filter(|&i| answer_bucket(counts[i]) == bucket).collect();
            let sub: Vec<EvalPair> = idx.iter().map(|&i| pairs[i].clone()).collect();
            let m: Vec<f64> = idx.iter().map(|&i| meteors[i]).collect();
            let r: Vec<f64> = idx.iter().map(|&i| rouges[i]).collect();
            SliceScores {
                bucket: bucket.to_string(),
                fraction: idx.len() as f64 / pairs.len() as f64,
                scores: corpus_scores(&sub, &m, &r),
            }
        })
        .collect();

    let samples = pairs
        .iter()
        .zip(meta)
        .enumerate()
        .map(|(i, (p, m))| SampleScore {
            image_id: m.image_id,
            ocr_text: m.ocr_text,
            candidate: p.candidate.join(" "),
            references: m.references,
            answer_word_count: counts[i],
            bleu: sentence_bleu(&p.candidate, &p.references, HEADLINE_N),
            meteor: meteors[i],
            rouge_l: rouges[i],
            exact_match: p.references.contains(&p.candidate),
        })
        .collect();
    Ok(EvalReport { corpus, slices, samples })
}

/// Corpus BLEU, mean sentence METEOR and ROUGE-L (best over references),
/// and the same scores per answer word-count bucket.
pub fn evaluate_corpus(pairs: &[EvalPair], answer_word_counts: &[usize]) -> Result<EvalReport> {
    let meta = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| Meta {
            image_id: i.to_string(),
            ocr_text: String::new(),
            references: p.references.iter().map(|r| r.join(" ")).collect(),
        })
        .collect();
    build(pairs, answer_word_counts, meta)
}

pub fn evaluate_predictions(rows: &[PredictionRow]) -> Result<EvalReport> {
    let pairs = rows.iter().map(PredictionRow::pair).collect::<Result<Vec<_>>>()?;
    let counts: Vec<usize> = rows.iter().map(|r| r.answer_word_count).collect();
    let meta = rows
        .iter()
        .map(|r| Meta {
            image_id: r.image_id.clone(),
            ocr_text: r.ocr_text.clone(),
            references: r.references.clone(),
        })
        .collect();
    build(&pairs, &counts, meta)
}

impl EvalReport {
    pub fn bleu(&self) -> f64 {
        self.corpus.bleu
    }

    pub fn meteor(&self) -> f64 {
        self.corpus.meteor
    }

    pub fn rouge_l(&self) -> f64 {
        self.corpus.rouge_l
    }

    pub fn slice(&self, bucket: &str) -> Option<&SliceScores> {
        self.slices.iter().find(|s| s.bucket == bucket)
    }

    /// Prediction rows reconstructed from the stored per-sample data.
    pub fn prediction_rows(&self) -> Vec<PredictionRow> {
        self.samples
            .iter()
            .map(|s| PredictionRow {
                image_id: s.image_id.clone(),
                ocr_text: s.ocr_text.clone(),
                generated: s.candidate.clone(),
                references: s.references.clone(),
                answer_word_count: s.answer_word_count,
            })
            .collect()
    }

    /// Re-runs the evaluation from the stored per-sample rows.
    pub fn recompute(&self) -> Result<EvalReport> {
        evaluate_predictions(&self.prediction_rows())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<EvalReport> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, gen: &str, reference: &str, n: usize) -> PredictionRow {
        PredictionRow {
            image_id: id.into(),
            ocr_text: "INTA".into(),
            generated: gen.into(),
            references: vec![reference.into()],
            answer_word_count: n,
        }
    }

    #[test]
    fn buckets() {
        assert_eq!(answer_bucket(1), "1");
        assert_eq!(answer_bucket(3), "3");
        assert_eq!(answer_bucket(4), ">3");
        assert_eq!(answer_bucket(17), ">3");
    }

    #[test]
    fn perfect_predictions_score_one() {
        let rows = vec![
            row("a", "what is the number on the bus?", "what is the number on the bus?", 1),
            row("b", "what does the sign say?", "what does the sign say?", 2),
        ];
        let rep = evaluate_predictions(&rows).unwrap();
        assert_eq!(rep.bleu(), 1.0);
        assert_eq!(rep.rouge_l(), 1.0);
        assert!(rep.samples.iter().all(|s| s.exact_match));
        assert_eq!(rep.slice("1").unwrap().fraction, 0.5);
        assert_eq!(rep.slice(">3").unwrap().scores.count, 0);
        assert_eq!(rep.slice(">3").unwrap().scores.bleu, 0.0);
    }

    #[test]
    fn report_recomputes_from_samples_and_round_trips() {
        let rows = vec![
            row("a", "what is the brand ?", "what brand is the bottle?", 1),
            row("b", "what does it say", "what does the sign say?", 3),
            row("c", "what is the name of the store?", "what is the name of the book?", 5),
        ];
        let rep = evaluate_predictions(&rows).unwrap();
        assert_eq!(rep.recompute().unwrap(), rep);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        rep.write(&p).unwrap();
        assert_eq!(EvalReport::read(&p).unwrap(), rep);
        let fr: f64 = rep.slices.iter().map(|s| s.fraction).sum();
        assert!((fr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_file_accepts_single_reference_and_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.jsonl");
        fs::write(
            &p,
            "{\"image_id\":\"a\",\"ocr_text\":\"x\",\"generated\":\"q\",\"reference\":\"q\",\"answer_word_count\":1}\n{bad\n",
        )
        .unwrap();
        let err = PredictionRow::read_jsonl(&p).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        fs::write(&p, "").unwrap();
        assert!(PredictionRow::read_jsonl(&p).is_err());
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let pairs = vec![EvalPair::single(vec!["a".into()], vec!["a".into()])];
        assert!(evaluate_corpus(&pairs, &[]).is_err());
        assert!(evaluate_corpus(&[], &[]).is_err());
        assert_eq!(evaluate_corpus(&pairs, &[1]).unwrap().bleu(), 1.0);
    }
}
