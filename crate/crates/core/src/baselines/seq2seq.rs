//! Recurrent encoder over caption + OCR words feeding an LSTM decoder.

use rand::Rng;

use crate::nn::decoder::{LstmDecoder, LstmDecoderTrace, LstmState, TeacherBatch};
use crate::nn::layers::Embedding;
use crate::nn::lstm::{LstmCell, LstmRun};
use crate::nn::{impl_tensors, zeros_like, Mat};
use crate::error::{Error, Result};
use crate::text::PAD_ID;

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel {
    pub src_embed: Embedding,
    pub encoder: LstmCell,
    pub decoder: LstmDecoder,
}
impl_tensors!(Seq2SeqModel { src_embed, encoder, decoder });

struct Encoded {
    ids: Vec<Vec<usize>>,
    run: LstmRun,
}

impl Seq2SeqModel {
    pub fn new(rng: &mut impl Rng, src_vocab: usize, vocab: usize, embed: usize, hidden: usize) -> Self {
        Seq2SeqModel {
            src_embed: Embedding::new(rng, src_vocab, embed),
            encoder: LstmCell::new(rng, embed, hidden),
            decoder: LstmDecoder::new(rng, vocab, embed, hidden),
        }
    }

    fn encode(&self, sources: &[&[usize]]) -> Result<Encoded> {
        let sv = self.src_embed.table.nrows();
        for s in sources {
            if s.is_empty() {
                return Err(Error::Invalid("seq2seq source sequence is empty".into()));
            }
            if let Some(&id) = s.iter().find(|&&id| id >= sv) {
                return Err(Error::IdOutOfRange { id, size: sv });
            }
        }
        let steps = sources.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut ids = vec![vec![PAD_ID; sources.len()]; steps];
        let mut masks = vec![Mat::zeros((sources.len(), 1)); steps];
        for (b, s) in sources.iter().enumerate() {
            for (t, &id) in s.iter().enumerate() {
                ids[t][b] = id;
                masks[t][[b, 0]] = 1.0;
            }
        }
        let xs: Vec<Mat> = ids.iter().map(|row| self.src_embed.forward(row)).collect();
        let h = self.encoder.hidden();
        let zeros = Mat::zeros((sources.len(), h));
        let run = self.encoder.run(&xs, Some(&masks), &zeros, &zeros);
        Ok(Encoded { ids, run })
    }

    /// Final encoder state, used to seed decoding.
    pub fn initial_state(&self, source: &[usize]) -> Result<LstmState> {
        let e = self.encode(&[source])?;
        Ok(LstmState {
            h: e.run.h,
            c: e.run.c,
        })
    }

    pub fn loss_and_grad(
        &self,
        sources: &[&[usize]],
        targets: &[&[usize]],
        want_grad: bool,
    ) -> Result<(f64, Option<Seq2SeqModel>)> {
        let v = self.decoder.vocab_size();
        if let Some(&id) = targets.iter().flat_map(|t| t.iter()).find(|&&id| id >= v) {
            return Err(Error::IdOutOfRange { id, size: v });
        }
        let batch = TeacherBatch::new(targets)?;
        let enc = self.encode(sources)?;
        let (loss, trace) = self.decoder.teacher_forced(&enc.run.h, &enc.run.c, &batch);
        if !want_grad {
            return Ok((loss, None));
        }
        Ok((loss, Some(self.backward(&enc, &trace))))
    }

    fn backward(&self, enc: &Encoded, trace: &LstmDecoderTrace) -> Seq2SeqModel {
        let mut g = zeros_like(self);
        let (dh, dc) = self.decoder.backward(trace, &mut g.decoder);
        let (dxs, _, _) = self.encoder.run_backward(&enc.run, None, &dh, &dc, &mut g.encoder);
        for (ids, dx) in enc.ids.iter().zip(&dxs) {
            self.src_embed.backward(ids, dx, &mut g.src_embed);
        }
        g
    }
}
