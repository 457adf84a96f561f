use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::MAX_QUESTION_LEN;

/// Layer widths shared by OLRA and the recurrent baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelDims {
    /// Pretrained word-vector width fed to the token B-LSTM.
    pub word_dim: usize,
    /// Per-direction B-LSTM state; the token feature is twice this.
    pub token_hidden: usize,
    /// Visual feature width after the optional projection.
    pub visual_dim: usize,
    pub fusion_hidden: usize,
    /// Width of Ψ, which is also the decoder state size.
    pub joint_dim: usize,
    pub recon_hidden: usize,
    /// Decoder word-embedding width.
    pub embed_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            word_dim: 300,
            token_hidden: 256,
            visual_dim: 512,
            fusion_hidden: 512,
            joint_dim: 512,
            recon_hidden: 512,
            embed_dim: 300,
        }
    }
}

impl ModelDims {
    pub fn token_dim(&self) -> usize {
        2 * self.token_hidden
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.word_dim,
            self.token_hidden,
            self.visual_dim,
            self.fusion_hidden,
            self.joint_dim,
            self.recon_hidden,
            self.embed_dim,
        ];
        if all.contains(&0) {
            return Err(Error::Invalid(format!("model dims must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Per-epoch learning-rate decay: epoch `e` (from 0) uses
    /// `learning_rate / (1 + decay * e)`.
    pub decay: f64,
    /// Weight of the OCR-consistency loss.
    pub lambda: f64,
    pub epochs: usize,
    /// Maximum question length in words.
    pub max_len: usize,
    pub seed: u64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub clip_norm: f64,
    /// Feed the positional feature; `false` zeroes it.
    pub use_position: bool,
    pub dims: ModelDims,
    /// MELM history window.
    pub melm_history: usize,
    /// Scale MELM OCR indicators by recognizer confidence when available.
    pub melm_confidence: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 32,
            decay: 0.05,
            lambda: 0.001,
            epochs: 10,
            max_len: MAX_QUESTION_LEN,
            seed: 0,
            clip_norm: 5.0,
            use_position: true,
            dims: ModelDims::default(),
            melm_history: 2,
            melm_confidence: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("train config: {what}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.epochs == 0 || self.max_len == 0 || self.melm_history == 0 {
            return bad("batch_size, epochs, max_len and melm_history must be positive");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be non-negative");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if self.clip_norm.is_nan() || self.clip_norm < 0.0 {
            return bad("clip_norm must be non-negative");
        }
        self.dims.validate()
    }

    /// Learning rate for epoch `epoch`, counted from 0.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.learning_rate / (1.0 + self.decay * epoch as f64)
    }
}
