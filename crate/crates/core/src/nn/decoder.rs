//! Recurrent question decoders: teacher-forced loss with backward pass, and
//! greedy / beam search over a step interface.

use std::cmp::Ordering;

use rand::Rng;

use super::gru::{GruCell, GruStep};
use super::layers::{Embedding, Linear};
use super::loss::{log_softmax, softmax_xent};
use super::lstm::{LstmCell, LstmRun};
use super::{add_into, impl_tensors, Mat};
use crate::error::{Error, Result};
use crate::text::{EOS_ID, PAD_ID, SOS_ID, UNK_ID};

/// Time-major view of a batch of `<sos> .. <eos>` id sequences for teacher
/// forcing. Step t feeds `seq[t]` and predicts `seq[t + 1]`.
#[derive(Debug, Clone)]
pub struct TeacherBatch {
    pub inputs: Vec<Vec<usize>>,
    pub targets: Vec<Vec<usize>>,
    /// `1 / n_tokens` at real positions, 0 at padding.
    pub weights: Vec<Vec<f64>>,
    pub n_tokens: usize,
}

impl TeacherBatch {
    pub fn new<S: AsRef<[usize]>>(seqs: &[S]) -> Result<Self> {
        if seqs.is_empty() {
            return Err(Error::Invalid("empty batch".into()));
        }
        for s in seqs {
            let s = s.as_ref();
            if s.len() < 2 {
                return Err(Error::Invalid(format!(
                    "target sequence needs at least <sos> and <eos>, got {} ids",
                    s.len()
                )));
            }
            if s[0] != SOS_ID || s[s.len() - 1] != EOS_ID {
                return Err(Error::Invalid("target sequence must be <sos> .. <eos>".into()));
            }
        }
        let steps = seqs.iter().map(|s| s.as_ref().len() - 1).max().unwrap_or(0);
        let n_tokens: usize = seqs.iter().map(|s| s.as_ref().len() - 1).sum();
        let w = 1.0 / n_tokens as f64;
        let mut inputs = vec![vec![PAD_ID; seqs.len()]; steps];
        let mut targets = vec![vec![PAD_ID; seqs.len()]; steps];
        let mut weights = vec![vec![0.0; seqs.len()]; steps];
        for (b, s) in seqs.iter().enumerate() {
            let s = s.as_ref();
            for t in 0..s.len() - 1 {
                inputs[t][b] = s[t];
                targets[t][b] = s[t + 1];
                weights[t][b] = w;
            }
        }
        Ok(TeacherBatch {
            inputs,
            targets,
            weights,
            n_tokens,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

/// Embedding -> LSTM -> dense projection to the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmDecoder {
    pub embed: Embedding,
    pub cell: LstmCell,
    pub out: Linear,
}
impl_tensors!(LstmDecoder { embed, cell, out });

#[derive(Debug, Clone)]
pub struct LstmDecoderTrace {
    run: LstmRun,
    inputs: Vec<Vec<usize>>,
    dlogits: Vec<Mat>,
}

impl LstmDecoder {
    pub fn new(rng: &mut impl Rng, vocab: usize, embed: usize, hidden: usize) -> Self {
        LstmDecoder {
            embed: Embedding::new(rng, vocab, embed),
            cell: LstmCell::new(rng, embed, hidden),
            out: Linear::new(rng, hidden, vocab),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.out.output_dim()
    }

    /// Mean per-token negative log-likelihood of `batch` from initial state
    /// `(h0, c0)`, plus the trace needed for [`LstmDecoder::backward`].
    pub fn teacher_forced(&self, h0: &Mat, c0: &Mat, batch: &TeacherBatch) -> (f64, LstmDecoderTrace) {
        let xs: Vec<Mat> = batch.inputs.iter().map(|ids| self.embed.forward(ids)).collect();
        let run = self.cell.run(&xs, None, h0, c0);
        let mut loss = 0.0;
        let mut dlogits = Vec::with_capacity(xs.len());
        for (t, h) in run.hs.iter().enumerate() {
            let logits = self.out.forward(h);
            let (l, d) = softmax_xent(&logits, &batch.targets[t], &batch.weights[t]);
            loss += l;
            dlogits.push(d);
        }
        (
            loss,
            LstmDecoderTrace {
                run,
                inputs: batch.inputs.clone(),
                dlogits,
            },
        )
    }

    /// Accumulates gradients and returns `(dh0, dc0)`.
    pub fn backward(&self, trace: &LstmDecoderTrace, grad: &mut LstmDecoder) -> (Mat, Mat) {
        let dhs: Vec<Mat> = trace
            .run
            .hs
            .iter()
            .zip(&trace.dlogits)
            .map(|(h, d)| self.out.backward(h, d, &mut grad.out))
            .collect();
        let zeros = Mat::zeros(trace.run.h.raw_dim());
        let (dxs, dh0, dc0) = self.cell.run_backward(&trace.run, Some(&dhs), &zeros, &zeros, &mut grad.cell);
        for (ids, dx) in trace.inputs.iter().zip(&dxs) {
            self.embed.backward(ids, dx, &mut grad.embed);
        }
        (dh0, dc0)
    }
}

#[derive(Debug, Clone)]
pub struct LstmState {
    pub h: Mat,
    pub c: Mat,
}

impl StepDecoder for LstmDecoder {
    type State = LstmState;

    fn next(&self, state: &LstmState, prev: usize) -> (Vec<f64>, LstmState) {
        let x = self.embed.forward(&[prev]);
        let (h, c, _) = self.cell.step(&x, &state.h, &state.c);
        let logits = self.out.forward(&h);
        (log_softmax(logits.as_slice().expect("contiguous")), LstmState { h, c })
    }
}

/// Embedding -> GRU -> dense projection to the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct GruDecoder {
    pub embed: Embedding,
    pub cell: GruCell,
    pub out: Linear,
}
impl_tensors!(GruDecoder { embed, cell, out });

#[derive(Debug, Clone)]
pub struct GruDecoderTrace {
    steps: Vec<GruStep>,
    hs: Vec<Mat>,
    inputs: Vec<Vec<usize>>,
    dlogits: Vec<Mat>,
}

impl GruDecoder {
    pub fn new(rng: &mut impl Rng, vocab: usize, embed: usize, hidden: usize) -> Self {
        GruDecoder {
            embed: Embedding::new(rng, vocab, embed),
            cell: GruCell::new(rng, embed, hidden),
            out: Linear::new(rng, hidden, vocab),
        }
    }

    pub fn teacher_forced(&self, h0: &Mat, batch: &TeacherBatch) -> (f64, GruDecoderTrace) {
        let mut h = h0.clone();
        let mut steps = Vec::new();
        let mut hs = Vec::new();
        let mut dlogits = Vec::new();
        let mut loss = 0.0;
        for (t, ids) in batch.inputs.iter().enumerate() {
            let x = self.embed.forward(ids);
            let (h_new, st) = self.cell.step(&x, &h);
            let logits = self.out.forward(&h_new);
            let (l, d) = softmax_xent(&logits, &batch.targets[t], &batch.weights[t]);
            loss += l;
            dlogits.push(d);
            steps.push(st);
            hs.push(h_new.clone());
            h = h_new;
        }
        (
            loss,
            GruDecoderTrace {
                steps,
                hs,
                inputs: batch.inputs.clone(),
                dlogits,
            },
        )
    }

    /// Accumulates gradients and returns `dh0`.
    pub fn backward(&self, trace: &GruDecoderTrace, grad: &mut GruDecoder) -> Mat {
        let hd = self.cell.hidden();
        let rows = trace.inputs.first().map_or(0, Vec::len);
        let mut dh = Mat::zeros((rows, hd));
        for t in (0..trace.steps.len()).rev() {
            let d_out = self.out.backward(&trace.hs[t], &trace.dlogits[t], &mut grad.out);
            add_into(&mut dh, &d_out);
            let (dx, dh_prev) = self.cell.step_backward(&trace.steps[t], &dh, &mut grad.cell);
            self.embed.backward(&trace.inputs[t], &dx, &mut grad.embed);
            dh = dh_prev;
        }
        dh
    }
}

impl StepDecoder for GruDecoder {
    type State = Mat;

    fn next(&self, state: &Mat, prev: usize) -> (Vec<f64>, Mat) {
        let x = self.embed.forward(&[prev]);
        let (h, _) = self.cell.step(&x, state);
        let logits = self.out.forward(&h);
        (log_softmax(logits.as_slice().expect("contiguous")), h)
    }
}

/// One step of autoregressive decoding.
pub trait StepDecoder {
    type State: Clone;

    /// Log-probabilities of the next token after `prev`, and the new state.
    fn next(&self, state: &Self::State, prev: usize) -> (Vec<f64>, Self::State);
}

fn allowed(id: usize) -> bool {
    !matches!(id, PAD_ID | SOS_ID | UNK_ID)
}

/// Greedy decoding from `<sos>`. Returns word ids (no reserved tokens),
/// stopping at `<eos>` or after `max_len` words.
pub fn greedy<D: StepDecoder>(dec: &D, init: D::State, max_len: usize) -> Vec<usize> {
    let mut state = init;
    let mut prev = SOS_ID;
    let mut out = Vec::new();
    while out.len() < max_len {
        let (lp, next_state) = dec.next(&state, prev);
        let best = lp
            .iter()
            .enumerate()
            .filter(|(k, _)| allowed(*k))
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(k, _)| k)
            .unwrap_or(EOS_ID);
        if best == EOS_ID {
            break;
        }
        out.push(best);
        prev = best;
        state = next_state;
    }
    out
}

struct Hyp<S> {
    score: f64,
    words: Vec<usize>,
    state: S,
}

fn rank(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Beam search with the same stop rules as [`greedy`]. Scores are summed
/// log-probabilities; `width` 1 reproduces greedy decoding.
pub fn beam<D: StepDecoder>(dec: &D, init: D::State, max_len: usize, width: usize) -> Vec<usize> {
    let width = width.max(1);
    let mut alive = vec![Hyp {
        score: 0.0,
        words: Vec::new(),
        state: init,
    }];
    let mut finished: Vec<(f64, Vec<usize>)> = Vec::new();
    while !alive.is_empty() {
        let mut cands: Vec<(f64, Vec<usize>, D::State)> = Vec::new();
        for hyp in &alive {
            if hyp.words.len() >= max_len {
                finished.push((hyp.score, hyp.words.clone()));
                continue;
            }
            let prev = hyp.words.last().copied().unwrap_or(SOS_ID);
            let (lp, st) = dec.next(&hyp.state, prev);
            let mut order: Vec<usize> = (0..lp.len()).filter(|&k| allowed(k)).collect();
            order.sort_by(|&a, &b| lp[b].total_cmp(&lp[a]).then_with(|| a.cmp(&b)));
            for &k in order.iter().take(width) {
                let score = hyp.score + lp[k];
                if k == EOS_ID {
                    finished.push((score, hyp.words.clone()));
                } else {
                    let mut words = hyp.words.clone();
                    words.push(k);
                    cands.push((score, words, st.clone()));
                }
            }
        }
        cands.sort_by(|a, b| rank((a.0, &a.1), (b.0, &b.1)));
        cands.truncate(width);
        let best_finished = finished.iter().map(|f| f.0).fold(f64::NEG_INFINITY, f64::max);
        // scores only decrease, so a finished hypothesis beating every live one is final
        if cands.first().is_none_or(|c| c.0 <= best_finished) && finished.len() >= width {
            break;
        }
        alive = cands
            .into_iter()
            .map(|(score, words, state)| Hyp { score, words, state })
            .collect();
    }
    finished.sort_by(|a, b| rank((a.0, &a.1), (b.0, &b.1)));
    finished.into_iter().next().map(|f| f.1).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fixed next-token table keyed by the previous token.
    struct Table {
        rows: Vec<Vec<f64>>,
    }

    impl StepDecoder for Table {
        type State = ();
        fn next(&self, _: &(), prev: usize) -> (Vec<f64>, ()) {
            (log_softmax(&self.rows[prev]), ())
        }
    }

    fn chain() -> Table {
        // vocab: 0 pad, 1 sos, 2 eos, 3 unk, 4 a, 5 b
        let mut rows = vec![vec![0.0; 6]; 6];
        rows[SOS_ID][4] = 5.0;
        rows[SOS_ID][3] = 9.0; // unk is never emitted
        rows[4][5] = 5.0;
        rows[5][EOS_ID] = 5.0;
        Table { rows }
    }

    #[test]
    fn greedy_follows_argmax_chain() {
        assert_eq!(greedy(&chain(), (), 20), vec![4, 5]);
        assert_eq!(greedy(&chain(), (), 1), vec![4]);
    }

    #[test]
    fn greedy_stops_immediately_on_eos() {
        let mut t = chain();
        for r in &mut t.rows {
            r[EOS_ID] = 50.0;
        }
        assert!(greedy(&t, (), 20).is_empty());
    }

    #[test]
    fn beam_finds_higher_scoring_path() {
        // greedy takes "a" (0.55) then a flat distribution; beam prefers "b" then a sure eos
        let mut rows = vec![vec![f64::NEG_INFINITY; 6]; 6];
        rows[SOS_ID][4] = 0.55f64.ln();
        rows[SOS_ID][5] = 0.45f64.ln();
        rows[4][4] = 0.34f64.ln();
        rows[4][5] = 0.33f64.ln();
        rows[4][EOS_ID] = 0.33f64.ln();
        rows[5][EOS_ID] = 0.0;
        let t = Table { rows };
        assert_eq!(greedy(&t, (), 1), vec![4]);
        assert_eq!(beam(&t, (), 5, 2), vec![5]);
        assert_eq!(beam(&t, (), 5, 1), greedy(&t, (), 5));
    }

    #[test]
    fn teacher_batch_rejects_short_sequences() {
        assert!(TeacherBatch::new(&[vec![SOS_ID]]).is_err());
        let b = TeacherBatch::new(&[vec![SOS_ID, 4, EOS_ID], vec![SOS_ID, EOS_ID]]).unwrap();
        assert_eq!(b.n_tokens, 3);
        assert_eq!(b.inputs.len(), 2);
        assert_eq!(b.weights[1], vec![1.0 / 3.0, 0.0]);
    }
}
