//! Any trained model behind one save / load / generate interface.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    generate_baseline, train_baseline, BaselineKind, BaselineModel, BaselineResources, GrnnModel,
    MelmModel, Seq2SeqModel, SideInfo, GRNN_INPUT_DIM,
};
use crate::checkpoint::{
    read_json, read_params, read_vocab, write_json, write_params, write_vocab, CONFIG_FILE, VOCAB_FILE,
};
use crate::data::{DatasetManifest, FeatureStore};
use crate::encoders::{build_positional, embed_token_words, words_to_mat, WordVectorTable, POS_DIM};
use crate::error::{Error, Result};
use crate::nn::substream;
use crate::olra::{train_olra, EpochLog, OlraInput, OlraModel, Stores, TrainConfig, TrainOutcome};
use crate::sample::Sample;
use crate::text::Vocabulary;

pub const MELM_FEATURES_FILE: &str = "melm_features.json";
pub const SRC_VOCAB_FILE: &str = "src_vocab.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Olra,
    Melm,
    Seq2seq,
    Grnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Olra, ModelKind::Melm, ModelKind::Seq2seq, ModelKind::Grnn];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Olra => "olra",
            ModelKind::Melm => "melm",
            ModelKind::Seq2seq => "seq2seq",
            ModelKind::Grnn => "grnn",
        }
    }

    /// Display name used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Olra => "OLRA",
            ModelKind::Melm => "MELM",
            ModelKind::Seq2seq => "seq2seq",
            ModelKind::Grnn => "GRNN",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            ModelKind::Olra => None,
            ModelKind::Melm => Some(BaselineKind::Melm),
            ModelKind::Seq2seq => Some(BaselineKind::Seq2seq),
            ModelKind::Grnn => Some(BaselineKind::Grnn),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "model",
                value: s.to_string(),
                expected: "olra, melm, seq2seq, grnn".into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum AnyModel {
    Olra(OlraModel),
    Baseline(BaselineModel),
}

/// Everything a model reads besides its weights.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    /// Visual store for OLRA (512-d, or any width with a projection).
    pub visual: &'a FeatureStore,
    /// 4096-d store for GRNN, when available.
    pub visual_wide: Option<&'a FeatureStore>,
    pub words: &'a WordVectorTable,
    pub side: &'a SideInfo,
}

impl<'a> Resources<'a> {
    fn baseline(&self) -> BaselineResources<'a> {
        BaselineResources {
            side: self.side,
            visual: self.visual_wide.or(Some(self.visual)),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointConfig {
    model: ModelKind,
    epoch: usize,
    visual_in: usize,
    vocab_size: usize,
    train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub model: AnyModel,
    /// Epochs completed when the weights were captured.
    pub epoch: usize,
}

/// Input-feature resolution for one OLRA sample outside training.
pub fn olra_input(
    sample: &Sample,
    index: usize,
    visual: &FeatureStore,
    words: &WordVectorTable,
    use_position: bool,
) -> Result<OlraInput> {
    let v = visual.get(&sample.image_id).ok_or_else(|| Error::MissingFeature {
        sample: index,
        image_id: sample.image_id.clone(),
    })?;
    let position = if use_position {
        build_positional(&sample.ocr.bbox, sample.image_w, sample.image_h)?.into_inner()
    } else {
        vec![0.0; POS_DIM]
    };
    Ok(OlraInput {
        words: words_to_mat(&embed_token_words(&sample.ocr, words))?,
        visual: v.iter().map(|&x| f64::from(x)).collect(),
        position,
    })
}

impl TrainedModel {
    fn visual_in(&self) -> usize {
        match &self.model {
            AnyModel::Olra(m) => m.visual_in(),
            AnyModel::Baseline(BaselineModel::Grnn(m)) => m.input_dim(),
            AnyModel::Baseline(_) => 0,
        }
    }

    /// Writes weights, config and vocabulary into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        match &self.model {
            AnyModel::Olra(m) => write_params(dir, m)?,
            AnyModel::Baseline(BaselineModel::Melm(m)) => {
                write_params(dir, m)?;
                write_json(&dir.join(MELM_FEATURES_FILE), &m.features)?;
            }
            AnyModel::Baseline(BaselineModel::Seq2seq { model, src_vocab }) => {
                write_params(dir, model)?;
                write_vocab(&dir.join(SRC_VOCAB_FILE), src_vocab)?;
            }
            AnyModel::Baseline(BaselineModel::Grnn(m)) => write_params(dir, m)?,
        }
        let cfg = CheckpointConfig {
            model: self.kind,
            epoch: self.epoch,
            visual_in: self.visual_in(),
            vocab_size: self.vocab.len(),
            train: self.config.clone(),
        };
        write_json(&dir.join(CONFIG_FILE), &cfg)?;
        write_vocab(&dir.join(VOCAB_FILE), &self.vocab)
    }

    pub fn load(dir: &Path) -> Result<TrainedModel> {
        let cfg: CheckpointConfig = read_json(&dir.join(CONFIG_FILE))?;
        let vocab = read_vocab(&dir.join(VOCAB_FILE))?;
        if vocab.len() != cfg.vocab_size {
            return Err(Error::Integrity(format!(
                "checkpoint vocabulary has {} entries, config says {}",
                vocab.len(),
                cfg.vocab_size
            )));
        }
        let d = &cfg.train.dims;
        let v = vocab.len();
        let mut rng = substream(0, "checkpoint-template");
        let model = match cfg.model {
            ModelKind::Olra => {
                let mut m = OlraModel::new(0, d, cfg.visual_in, v);
                read_params(dir, &mut m)?;
                AnyModel::Olra(m)
            }
            ModelKind::Melm => {
                let features: Vec<String> = read_json(&dir.join(MELM_FEATURES_FILE))?;
                let mut m = MelmModel::new(features, v, cfg.train.melm_history);
                read_params(dir, &mut m)?;
                AnyModel::Baseline(BaselineModel::Melm(m))
            }
            ModelKind::Seq2seq => {
                let src_vocab = read_vocab(&dir.join(SRC_VOCAB_FILE))?;
                let mut model = Seq2SeqModel::new(&mut rng, src_vocab.len(), v, d.embed_dim, d.joint_dim);
                read_params(dir, &mut model)?;
                AnyModel::Baseline(BaselineModel::Seq2seq { model, src_vocab })
            }
            ModelKind::Grnn => {
                let mut m = GrnnModel::new(&mut rng, GRNN_INPUT_DIM, v, d.embed_dim, d.joint_dim);
                read_params(dir, &mut m)?;
                AnyModel::Baseline(BaselineModel::Grnn(m))
            }
        };
        Ok(TrainedModel {
            kind: cfg.model,
            config: cfg.train,
            vocab,
            model,
            epoch: cfg.epoch,
        })
    }

    /// Question ids for `sample` (greedy when `beam_width <= 1`).
    pub fn generate(&self, sample: &Sample, index: usize, res: Resources<'_>, beam_width: usize) -> Result<Vec<usize>> {
        match &self.model {
            AnyModel::Olra(m) => {
                let input = olra_input(sample, index, res.visual, res.words, self.config.use_position)?;
                m.generate(&input, self.config.max_len, beam_width)
            }
            AnyModel::Baseline(b) => {
                generate_baseline(b, sample, res.baseline(), &self.vocab, &self.config, beam_width)
            }
        }
    }
}

/// Trains `kind` on the training manifest. `on_epoch` sees every epoch's
/// log line and a snapshot of the model.
pub fn train_model<F>(
    kind: ModelKind,
    manifest: &DatasetManifest,
    res: Resources<'_>,
    vocab: &Vocabulary,
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<(TrainedModel, Vec<EpochLog>)>
where
    F: FnMut(&EpochLog, &TrainedModel) -> Result<()>,
{
    let wrap = |model: AnyModel, epoch: usize| TrainedModel {
        kind,
        config: config.clone(),
        vocab: vocab.clone(),
        model,
        epoch,
    };
    match kind.baseline() {
        None => {
            let stores = Stores {
                visual: res.visual,
                words: res.words,
            };
            let out: TrainOutcome<OlraModel> = train_olra(manifest, stores, vocab, config, |l, m| {
                on_epoch(l, &wrap(AnyModel::Olra(m.clone()), l.epoch))
            })?;
            Ok((wrap(AnyModel::Olra(out.model), out.log.len()), out.log))
        }
        Some(b) => {
            let out = train_baseline(b, manifest, res.baseline(), vocab, config, |l, m| {
                on_epoch(l, &wrap(AnyModel::Baseline(m.clone()), l.epoch))
            })?;
            Ok((wrap(AnyModel::Baseline(out.model), out.log.len()), out.log))
        }
    }
}
