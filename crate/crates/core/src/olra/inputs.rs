use crate::data::{DatasetManifest, FeatureStore};
use crate::encoders::{build_positional, embed_token_words, words_to_mat, WordVectorTable, POS_DIM};
use crate::error::{Error, Result};
use crate::nn::Mat;
use crate::text::{encode_question, Vocabulary};

/// Feature sources a model run reads from.
#[derive(Debug, Clone, Copy)]
pub struct Stores<'a> {
    pub visual: &'a FeatureStore,
    pub words: &'a WordVectorTable,
}

/// Raw per-sample model inputs: OCR word vectors, the visual feature and
/// the positional feature.
#[derive(Debug, Clone, PartialEq)]
pub struct OlraInput {
    /// `n_words x word_dim`.
    pub words: Mat,
    pub visual: Vec<f64>,
    pub position: Vec<f64>,
}

/// A manifest sample resolved against the feature stores and vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSample {
    pub image_id: String,
    pub ocr_text: String,
    pub input: OlraInput,
    /// `<sos> .. <eos>` ids of the ground-truth question.
    pub target: Vec<usize>,
    pub question: Vec<String>,
    pub answer_word_count: usize,
}

/// Resolves every sample, failing on the first one whose visual feature is
/// missing. With `use_position == false` the positional feature is zeroed.
pub fn prepare_samples(
    manifest: &DatasetManifest,
    stores: Stores<'_>,
    vocab: &Vocabulary,
    max_len: usize,
    use_position: bool,
) -> Result<Vec<PreparedSample>> {
    manifest
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let visual = stores.visual.get(&s.image_id).ok_or_else(|| Error::MissingFeature {
                sample: i,
                image_id: s.image_id.clone(),
            })?;
            let vectors = embed_token_words(&s.ocr, stores.words);
            if vectors.is_empty() {
                return Err(Error::Invalid(format!("sample {i}: OCR token has no words")));
            }
            let position = if use_position {
                build_positional(&s.ocr.bbox, s.image_w, s.image_h)?.into_inner()
            } else {
                vec![0.0; POS_DIM]
            };
            Ok(PreparedSample {
                image_id: s.image_id.clone(),
                ocr_text: s.ocr.text.clone(),
                input: OlraInput {
                    words: words_to_mat(&vectors)?,
                    visual: visual.iter().map(|&v| f64::from(v)).collect(),
                    position,
                },
                target: encode_question(&s.question, vocab, max_len),
                question: s.question.clone(),
                answer_word_count: s.answer_word_count(),
            })
        })
        .collect()
}
