//! Comparison systems sharing the OLRA tokenizer, vocabulary, stop rules
//! and metrics: a maximum-entropy language model, a caption + OCR
//! sequence-to-sequence model, and a GRU decoder over image features.

mod grnn;
mod melm;
mod seq2seq;
mod side_info;

use std::fmt;
use std::str::FromStr;

pub use grnn::{GrnnModel, GRNN_INPUT_DIM};
pub use melm::{
    collect_features, melm_context_features, melm_context_features_scaled, unigram_perplexity,
    MelmContext, MelmDecoder, MelmModel, SparseFeatures, BIAS_FEATURE,
};
pub use seq2seq::Seq2SeqModel;
pub use side_info::{SideInfo, SideRecord};

use crate::data::{DatasetManifest, FeatureStore};
use crate::error::{Error, Result};
use crate::nn::decoder::{beam, greedy, StepDecoder};
use crate::nn::substream;
use crate::olra::{run_epochs, EpochLog, LossBreakdown, TrainConfig, TrainOutcome};
use crate::sample::Sample;
use crate::text::{build_vocab, encode_question, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Melm,
    Seq2seq,
    Grnn,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Melm, BaselineKind::Seq2seq, BaselineKind::Grnn];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Melm => "melm",
            BaselineKind::Seq2seq => "seq2seq",
            BaselineKind::Grnn => "grnn",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "baseline",
                value: s.to_string(),
                expected: "melm, seq2seq, grnn".into(),
            })
    }
}

/// External inputs the baselines read besides the manifest.
#[derive(Debug, Clone, Copy)]
pub struct BaselineResources<'a> {
    pub side: &'a SideInfo,
    /// 4096-d visual features, required by GRNN only.
    pub visual: Option<&'a FeatureStore>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineModel {
    Melm(MelmModel),
    Seq2seq { model: Seq2SeqModel, src_vocab: Vocabulary },
    Grnn(GrnnModel),
}

impl BaselineModel {
    pub fn kind(&self) -> BaselineKind {
        match self {
            BaselineModel::Melm(_) => BaselineKind::Melm,
            BaselineModel::Seq2seq { .. } => BaselineKind::Seq2seq,
            BaselineModel::Grnn(_) => BaselineKind::Grnn,
        }
    }
}

fn side_record<'a>(kind: BaselineKind, what: &str, i: usize, s: &Sample, side: &'a SideInfo) -> Result<&'a SideRecord> {
    side.get(&s.image_id).ok_or_else(|| Error::MissingSideInfo {
        kind: kind.to_string(),
        what: what.to_string(),
        sample: i,
        image_id: s.image_id.clone(),
    })
}

fn melm_context(i: usize, s: &Sample, res: BaselineResources<'_>, config: &TrainConfig) -> Result<MelmContext> {
    let rec = side_record(BaselineKind::Melm, "object tags", i, s, res.side)?;
    let ocr_words = s.ocr.words();
    let ocr_weights = match (config.melm_confidence, s.ocr.confidence) {
        (true, Some(c)) => Some(vec![c; ocr_words.len()]),
        _ => None,
    };
    Ok(MelmContext {
        ocr_words,
        ocr_weights,
        tags: rec.tags.clone(),
    })
}

/// Caption words followed by the OCR token words.
fn seq2seq_source_words(i: usize, s: &Sample, res: BaselineResources<'_>) -> Result<Vec<String>> {
    let rec = side_record(BaselineKind::Seq2seq, "a caption", i, s, res.side)?;
    let mut words = rec.caption.clone();
    words.extend(s.ocr.words());
    Ok(words)
}

fn grnn_visual(i: usize, s: &Sample, res: BaselineResources<'_>) -> Result<Vec<f64>> {
    let store = res.visual.ok_or_else(|| Error::MissingSideInfo {
        kind: "grnn".into(),
        what: format!("a {GRNN_INPUT_DIM}-d visual feature store"),
        sample: i,
        image_id: s.image_id.clone(),
    })?;
    if store.dim() != GRNN_INPUT_DIM {
        return Err(Error::Dimension(format!(
            "GRNN needs {GRNN_INPUT_DIM}-d visual features, store holds {}-d",
            store.dim()
        )));
    }
    let v = store.get(&s.image_id).ok_or_else(|| Error::MissingFeature {
        sample: i,
        image_id: s.image_id.clone(),
    })?;
    Ok(v.iter().map(|&x| f64::from(x)).collect())
}

fn encode_source(words: &[String], src_vocab: &Vocabulary) -> Vec<usize> {
    words.iter().map(|w| src_vocab.id_or_unk(w)).collect()
}

/// Trains one baseline by maximum likelihood with the same optimizer,
/// batching, schedule and log format as OLRA.
pub fn train_baseline<F>(
    kind: BaselineKind,
    manifest: &DatasetManifest,
    res: BaselineResources<'_>,
    vocab: &Vocabulary,
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainOutcome<BaselineModel>>
where
    F: FnMut(&EpochLog, &BaselineModel) -> Result<()>,
{
    config.validate()?;
    let samples = &manifest.samples;
    let targets: Vec<Vec<usize>> = samples
        .iter()
        .map(|s| encode_question(&s.question, vocab, config.max_len))
        .collect();
    let mut rng = substream(config.seed, &format!("{kind}-init"));
    let d = &config.dims;
    let loss_only = |l: f64| LossBreakdown::new(l, 0.0, 0.0);
    match kind {
        BaselineKind::Melm => {
            let ctx = samples
                .iter()
                .enumerate()
                .map(|(i, s)| melm_context(i, s, res, config))
                .collect::<Result<Vec<_>>>()?;
            let features = collect_features(
                targets.iter().map(Vec::as_slice).zip(ctx.iter()),
                vocab,
                config.melm_history,
            );
            let model = MelmModel::new(features, vocab.len(), config.melm_history);
            let events: Vec<_> = targets.iter().zip(&ctx).map(|(t, c)| model.events(t, c, vocab)).collect();
            let out = run_epochs(
                model,
                samples.len(),
                config,
                |m, chunk| {
                    let batch: Vec<_> = chunk.iter().flat_map(|&i| events[i].iter().cloned()).collect();
                    let (l, g) = m.loss_and_grad(&batch, true);
                    Ok((loss_only(l), g.expect("requested")))
                },
                |line, m| on_epoch(line, &BaselineModel::Melm(m.clone())),
            )?;
            Ok(TrainOutcome {
                model: BaselineModel::Melm(out.model),
                log: out.log,
            })
        }
        BaselineKind::Seq2seq => {
            let words = samples
                .iter()
                .enumerate()
                .map(|(i, s)| seq2seq_source_words(i, s, res))
                .collect::<Result<Vec<_>>>()?;
            let src_vocab = build_vocab(words.iter(), 1);
            let sources: Vec<Vec<usize>> = words.iter().map(|w| encode_source(w, &src_vocab)).collect();
            let model = Seq2SeqModel::new(&mut rng, src_vocab.len(), vocab.len(), d.embed_dim, d.joint_dim);
            let out = run_epochs(
                model,
                samples.len(),
                config,
                |m, chunk| {
                    let s: Vec<&[usize]> = chunk.iter().map(|&i| sources[i].as_slice()).collect();
                    let t: Vec<&[usize]> = chunk.iter().map(|&i| targets[i].as_slice()).collect();
                    let (l, g) = m.loss_and_grad(&s, &t, true)?;
                    Ok((loss_only(l), g.expect("requested")))
                },
                |line, m| {
                    on_epoch(
                        line,
                        &BaselineModel::Seq2seq {
                            model: m.clone(),
                            src_vocab: src_vocab.clone(),
                        },
                    )
                },
            )?;
            Ok(TrainOutcome {
                model: BaselineModel::Seq2seq {
                    model: out.model,
                    src_vocab,
                },
                log: out.log,
            })
        }
        BaselineKind::Grnn => {
            let visual = samples
                .iter()
                .enumerate()
                .map(|(i, s)| grnn_visual(i, s, res))
                .collect::<Result<Vec<_>>>()?;
            let model = GrnnModel::new(&mut rng, GRNN_INPUT_DIM, vocab.len(), d.embed_dim, d.joint_dim);
            let out = run_epochs(
                model,
                samples.len(),
                config,
                |m, chunk| {
                    let v: Vec<&[f64]> = chunk.iter().map(|&i| visual[i].as_slice()).collect();
                    let t: Vec<&[usize]> = chunk.iter().map(|&i| targets[i].as_slice()).collect();
                    let (l, g) = m.loss_and_grad(&v, &t, true)?;
                    Ok((loss_only(l), g.expect("requested")))
                },
                |line, m| on_epoch(line, &BaselineModel::Grnn(m.clone())),
            )?;
            Ok(TrainOutcome {
                model: BaselineModel::Grnn(out.model),
                log: out.log,
            })
        }
    }
}

fn decode<D: StepDecoder>(dec: &D, init: D::State, max_len: usize, beam_width: usize) -> Vec<usize> {
    if beam_width <= 1 {
        greedy(dec, init, max_len)
    } else {
        beam(dec, init, max_len, beam_width)
    }
}

/// Question word ids for one sample, with OLRA's stop rules.
pub fn generate_baseline(
    model: &BaselineModel,
    sample: &Sample,
    res: BaselineResources<'_>,
    vocab: &Vocabulary,
    config: &TrainConfig,
    beam_width: usize,
) -> Result<Vec<usize>> {
    let max_len = config.max_len;
    Ok(match model {
        BaselineModel::Melm(m) => {
            let ctx = melm_context(0, sample, res, config)?;
            let dec = MelmDecoder { model: m, ctx: &ctx, vocab };
            decode(&dec, Vec::new(), max_len, beam_width)
        }
        BaselineModel::Seq2seq { model, src_vocab } => {
            let words = seq2seq_source_words(0, sample, res)?;
            let init = model.initial_state(&encode_source(&words, src_vocab))?;
            decode(&model.decoder, init, max_len, beam_width)
        }
        BaselineModel::Grnn(m) => {
            let init = m.initial_state(&grnn_visual(0, sample, res)?)?;
            decode(&m.decoder, init, max_len, beam_width)
        }
    })
}

#[cfg(test)]
mod tests;

/// Train-set perplexity of a MELM model: `exp` of the mean per-token NLL.
pub fn melm_perplexity(
    model: &MelmModel,
    manifest: &DatasetManifest,
    res: BaselineResources<'_>,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<f64> {
    let mut events = Vec::new();
    for (i, s) in manifest.samples.iter().enumerate() {
        let ctx = melm_context(i, s, res, config)?;
        events.extend(model.events(&encode_question(&s.question, vocab, config.max_len), &ctx, vocab));
    }
    Ok(model.loss_and_grad(&events, false).0.exp())
}
