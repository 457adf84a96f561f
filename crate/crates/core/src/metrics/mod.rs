//! BLEU, ROUGE-L and METEOR, plus corpus reports sliced by answer length.

mod bleu;
mod lcs;
mod meteor;
mod report;

pub use bleu::{bleu_corpus, bleu_corpus_up_to, sentence_bleu};
pub use lcs::{lcs_length, rouge_l, ROUGE_BETA};
pub use meteor::{meteor, meteor_alignment};
pub use report::{
    answer_bucket, evaluate_corpus, evaluate_predictions, CorpusScores, EvalReport, PredictionRow,
    SampleScore, SliceScores, ANSWER_BUCKETS,
};

use crate::error::{Error, Result};

/// A candidate and its references, all tokenized with the shared tokenizer.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub candidate: Vec<String>,
    pub references: Vec<Vec<String>>,
}

impl EvalPair {
    pub fn new(candidate: Vec<String>, references: Vec<Vec<String>>) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::Invalid("evaluation pair needs at least one reference".into()));
        }
        Ok(EvalPair { candidate, references })
    }

    pub fn single(candidate: Vec<String>, reference: Vec<String>) -> Self {
        EvalPair {
            candidate,
            references: vec![reference],
        }
    }
}
