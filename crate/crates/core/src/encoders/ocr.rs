use ndarray::{concatenate, s, Axis};
use rand::Rng;

use super::features::TokenFeature;
use crate::error::{Error, Result};
use crate::nn::lstm::{LstmCell, LstmRun};
use crate::nn::{impl_tensors, Mat};

/// Bidirectional LSTM over the word vectors of an OCR token. The token
/// feature is `[h_forward_final; h_backward_final]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcrEncoder {
    pub forward: LstmCell,
    pub backward: LstmCell,
}
impl_tensors!(OcrEncoder { forward, backward });

#[derive(Debug, Clone)]
pub struct OcrEncoderTrace {
    fwd: LstmRun,
    bwd: LstmRun,
}

impl OcrEncoder {
    pub fn new(rng: &mut impl Rng, word_dim: usize, hidden: usize) -> Self {
        OcrEncoder {
            forward: LstmCell::new(rng, word_dim, hidden),
            backward: LstmCell::new(rng, word_dim, hidden),
        }
    }

    pub fn word_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.forward.hidden()
    }

    /// Encodes a batch of variable-length sequences (`len x word_dim` each).
    /// Shorter sequences are padded with masked steps, so each row equals the
    /// encoding of that sequence on its own.
    pub fn forward_batch(&self, seqs: &[&Mat]) -> Result<(Mat, OcrEncoderTrace)> {
        let d = self.word_dim();
        for s in seqs {
            if s.nrows() == 0 {
                return Err(Error::Invalid("cannot encode an empty OCR token".into()));
            }
            if s.ncols() != d {
                return Err(Error::Dimension(format!(
                    "word vectors have {} dims, encoder expects {d}",
                    s.ncols()
                )));
            }
        }
        let rows = seqs.len();
        let steps = seqs.iter().map(|s| s.nrows()).max().unwrap_or(0);
        let mut xf = vec![Mat::zeros((rows, d)); steps];
        let mut xb = vec![Mat::zeros((rows, d)); steps];
        let mut masks = vec![Mat::zeros((rows, 1)); steps];
        for (b, s) in seqs.iter().enumerate() {
            let len = s.nrows();
            for t in 0..len {
                xf[t].row_mut(b).assign(&s.row(t));
                xb[t].row_mut(b).assign(&s.row(len - 1 - t));
                masks[t][[b, 0]] = 1.0;
            }
        }
        let h = self.forward.hidden();
        let zeros = Mat::zeros((rows, h));
        let fwd = self.forward.run(&xf, Some(&masks), &zeros, &zeros);
        let bwd = self.backward.run(&xb, Some(&masks), &zeros, &zeros);
        let out = concatenate![Axis(1), fwd.h, bwd.h];
        Ok((out, OcrEncoderTrace { fwd, bwd }))
    }

    /// Word vectors are frozen, so only parameter gradients are produced.
    pub fn backward_batch(&self, trace: &OcrEncoderTrace, dout: &Mat, grad: &mut OcrEncoder) {
        let h = self.forward.hidden();
        let dc = Mat::zeros((dout.nrows(), h));
        let dhf = dout.slice(s![.., ..h]).to_owned();
        let dhb = dout.slice(s![.., h..]).to_owned();
        self.forward.run_backward(&trace.fwd, None, &dhf, &dc, &mut grad.forward);
        self.backward.run_backward(&trace.bwd, None, &dhb, &dc, &mut grad.backward);
    }
}

pub fn words_to_mat(vectors: &[Vec<f64>]) -> Result<Mat> {
    let d = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::Dimension("word vectors of unequal length".into()));
    }
    Ok(Mat::from_shape_vec((vectors.len(), d), vectors.concat()).expect("shape checked"))
}

/// Token feature of one OCR token from its word vectors.
pub fn encode_ocr(vectors: &[Vec<f64>], encoder: &OcrEncoder) -> Result<TokenFeature> {
    if vectors.is_empty() {
        return Err(Error::Invalid("cannot encode an empty OCR token".into()));
    }
    let m = words_to_mat(vectors)?;
    let (out, _) = encoder.forward_batch(&[&m])?;
    TokenFeature::with_dim(out.row(0).to_vec(), encoder.output_dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::{TOKEN_DIM, WORD_DIM};
    use crate::nn::{substream, uniform};

    #[test]
    fn full_size_output_shape() {
        let enc = OcrEncoder::new(&mut substream(3, "enc"), WORD_DIM, TOKEN_DIM / 2);
        let v = vec![vec![0.1; WORD_DIM]];
        let f = encode_ocr(&v, &enc).unwrap();
        assert_eq!(f.len(), TOKEN_DIM);
        assert_eq!(f, encode_ocr(&v, &enc).unwrap());
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let enc = OcrEncoder::new(&mut substream(3, "enc"), 4, 2);
        assert!(encode_ocr(&[], &enc).is_err());
        assert!(encode_ocr(&[vec![1.0; 3]], &enc).is_err());
    }

    #[test]
    fn padding_does_not_change_encodings() {
        let mut rng = substream(5, "pad");
        let enc = OcrEncoder::new(&mut rng, 4, 3);
        let a = uniform(&mut rng, 1, 4, 1.0);
        let b = uniform(&mut rng, 3, 4, 1.0);
        let (batch, _) = enc.forward_batch(&[&a, &b]).unwrap();
        let (solo_a, _) = enc.forward_batch(&[&a]).unwrap();
        let (solo_b, _) = enc.forward_batch(&[&b]).unwrap();
        for (x, y) in batch.row(0).iter().zip(solo_a.row(0)) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, y) in batch.row(1).iter().zip(solo_b.row(0)) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_check_at_reduced_dims() {
        use crate::nn::gradcheck::check;
        use crate::nn::zeros_like;
        let mut rng = substream(6, "enc-grad");
        let enc = OcrEncoder::new(&mut rng, 5, 8);
        let seqs = [uniform(&mut rng, 2, 5, 1.0), uniform(&mut rng, 1, 5, 1.0), uniform(&mut rng, 3, 5, 1.0)];
        let refs: Vec<&Mat> = seqs.iter().collect();
        let r = uniform(&mut rng, 3, 16, 1.0);
        let (_, trace) = enc.forward_batch(&refs).unwrap();
        let mut g = zeros_like(&enc);
        enc.backward_batch(&trace, &r, &mut g);
        let rep = check(&enc, &g, 1e-5, |p: &OcrEncoder| (&p.forward_batch(&refs).unwrap().0 * &r).sum());
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
    }
}
