use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::inputs::{prepare_samples, OlraInput, PreparedSample, Stores};
use super::model::{LossBreakdown, OlraModel};
use crate::data::DatasetManifest;
use crate::error::{Error, Result};
use crate::nn::adam::Adam;
use crate::nn::{clip_global_norm, substream, Tensors};
use crate::text::Vocabulary;

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// Counted from 1.
    pub epoch: usize,
    pub l_q: f64,
    pub l_a: f64,
    pub total: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub log: Vec<EpochLog>,
}

/// Sample order for one epoch, a pure function of seed and epoch.
pub fn epoch_order(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, &format!("shuffle-{epoch}")));
    order
}

/// Sample-weighted running means of per-batch losses.
#[derive(Debug, Default)]
struct EpochMeans {
    l_q: f64,
    l_a: f64,
    n: usize,
}

impl EpochMeans {
    fn add(&mut self, l: &LossBreakdown, batch: usize) {
        self.l_q += l.l_q * batch as f64;
        self.l_a += l.l_a * batch as f64;
        self.n += batch;
    }

    fn finish(&self, epoch: usize, lambda: f64, lr: f64) -> EpochLog {
        let n = self.n.max(1) as f64;
        let b = LossBreakdown::new(self.l_q / n, self.l_a / n, lambda);
        EpochLog {
            epoch,
            l_q: b.l_q,
            l_a: b.l_a,
            total: b.total,
            lr,
        }
    }
}

fn check_finite(l: &LossBreakdown, epoch: usize) -> Result<()> {
    if l.total.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("training diverged in epoch {epoch}: {l:?}")))
    }
}

/// Shared epoch loop: seeded shuffling, mini-batches, clipped Adam steps,
/// per-epoch learning-rate decay and the loss log. `batch_loss` returns the
/// batch losses and the gradient of `total`.
pub(crate) fn run_epochs<M, L, F>(
    mut model: M,
    n: usize,
    config: &TrainConfig,
    mut batch_loss: L,
    mut on_epoch: F,
) -> Result<TrainOutcome<M>>
where
    M: Tensors,
    L: FnMut(&M, &[usize]) -> Result<(LossBreakdown, M)>,
    F: FnMut(&EpochLog, &M) -> Result<()>,
{
    config.validate()?;
    if n == 0 {
        return Err(Error::Invalid("cannot train on an empty manifest".into()));
    }
    let mut adam = Adam::default();
    let mut log = Vec::with_capacity(config.epochs);
    for e in 0..config.epochs {
        let lr = config.lr_at(e);
        let mut means = EpochMeans::default();
        for chunk in epoch_order(config.seed, e, n).chunks(config.batch_size) {
            let (loss, mut grad) = batch_loss(&model, chunk)?;
            check_finite(&loss, e + 1)?;
            if config.clip_norm > 0.0 {
                clip_global_norm(&mut grad, config.clip_norm);
            }
            adam.update(&mut model, &grad, lr);
            means.add(&loss, chunk.len());
        }
        let line = means.finish(e + 1, config.lambda, lr);
        log::info!(
            "epoch {} l_q {:.5} l_a {:.5} total {:.5} lr {:.3e}",
            line.epoch,
            line.l_q,
            line.l_a,
            line.total,
            line.lr
        );
        on_epoch(&line, &model)?;
        log.push(line);
    }
    Ok(TrainOutcome { model, log })
}

/// Mini-batch Adam on `l_q + λ l_a` over prepared samples. `on_epoch` runs
/// after every epoch with the log line and current weights; an error from it
/// stops training.
pub fn train_prepared<F>(
    samples: &[PreparedSample],
    vocab_size: usize,
    config: &TrainConfig,
    on_epoch: F,
) -> Result<TrainOutcome<OlraModel>>
where
    F: FnMut(&EpochLog, &OlraModel) -> Result<()>,
{
    config.validate()?;
    let visual_in = samples.first().map_or(0, |s| s.input.visual.len());
    let model = OlraModel::new(config.seed, &config.dims, visual_in, vocab_size);
    run_epochs(
        model,
        samples.len(),
        config,
        |m, chunk| {
            let inputs: Vec<&OlraInput> = chunk.iter().map(|&i| &samples[i].input).collect();
            let targets: Vec<&[usize]> = chunk.iter().map(|&i| samples[i].target.as_slice()).collect();
            m.loss_and_grad(&inputs, &targets, config.lambda)
        },
        on_epoch,
    )
}

/// Resolves `manifest` against the stores, then trains.
pub fn train_olra<F>(
    manifest: &DatasetManifest,
    stores: Stores<'_>,
    vocab: &Vocabulary,
    config: &TrainConfig,
    on_epoch: F,
) -> Result<TrainOutcome<OlraModel>>
where
    F: FnMut(&EpochLog, &OlraModel) -> Result<()>,
{
    let samples = prepare_samples(manifest, stores, vocab, config.max_len, config.use_position)?;
    train_prepared(&samples, vocab.len(), config, on_epoch)
}

pub fn write_log_jsonl(log: &[EpochLog]) -> Result<String> {
    let mut out = String::new();
    for l in log {
        out.push_str(&serde_json::to_string(l)?);
        out.push('\n');
    }
    Ok(out)
}
