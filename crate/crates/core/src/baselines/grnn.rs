//! GRU question decoder seeded by a projected 4096-d image feature.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::decoder::{GruDecoder, TeacherBatch};
use crate::nn::layers::{Activation, Linear};
use crate::nn::{impl_tensors, zeros_like, Mat};

/// Visual feature width the model is built for.
pub const GRNN_INPUT_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct GrnnModel {
    /// `h0 = tanh(projection(v))`.
    pub projection: Linear,
    pub decoder: GruDecoder,
}
impl_tensors!(GrnnModel { projection, decoder });

impl GrnnModel {
    pub fn new(rng: &mut impl Rng, input: usize, vocab: usize, embed: usize, hidden: usize) -> Self {
        GrnnModel {
            projection: Linear::new(rng, input, hidden),
            decoder: GruDecoder::new(rng, vocab, embed, hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.projection.input_dim()
    }

    fn stack(&self, visual: &[&[f64]]) -> Result<Mat> {
        let d = self.input_dim();
        if let Some(v) = visual.iter().find(|v| v.len() != d) {
            return Err(Error::Dimension(format!(
                "GRNN expects {d}-d visual features, got {}",
                v.len()
            )));
        }
        Ok(Mat::from_shape_fn((visual.len(), d), |(r, c)| visual[r][c]))
    }

    pub fn initial_state(&self, visual: &[f64]) -> Result<Mat> {
        let x = self.stack(&[visual])?;
        Ok(Activation::Tanh.apply(&self.projection.forward(&x)))
    }

    pub fn loss_and_grad(
        &self,
        visual: &[&[f64]],
        targets: &[&[usize]],
        want_grad: bool,
    ) -> Result<(f64, Option<GrnnModel>)> {
        let v = self.decoder.out.output_dim();
        if let Some(&id) = targets.iter().flat_map(|t| t.iter()).find(|&&id| id >= v) {
            return Err(Error::IdOutOfRange { id, size: v });
        }
        let batch = TeacherBatch::new(targets)?;
        let x = self.stack(visual)?;
        let h0 = Activation::Tanh.apply(&self.projection.forward(&x));
        let (loss, trace) = self.decoder.teacher_forced(&h0, &batch);
        if !want_grad {
            return Ok((loss, None));
        }
        let mut g = zeros_like(self);
        let dh0 = self.decoder.backward(&trace, &mut g.decoder);
        let dpre = Activation::Tanh.backward(&h0, &dh0);
        self.projection.backward(&x, &dpre, &mut g.projection);
        Ok((loss, Some(g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::check;
    use crate::nn::{substream, uniform};

    #[test]
    fn gradient_check_at_reduced_dims() {
        let m = GrnnModel::new(&mut substream(1, "grnn"), 6, 10, 5, 8);
        let vis = uniform(&mut substream(2, "v"), 3, 6, 1.0);
        let rows: Vec<Vec<f64>> = vis.rows().into_iter().map(|r| r.to_vec()).collect();
        let v: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let tgt: Vec<Vec<usize>> = vec![vec![1, 4, 5, 2], vec![1, 9, 2], vec![1, 6, 7, 8, 2]];
        let t: Vec<&[usize]> = tgt.iter().map(Vec::as_slice).collect();
        let (_, g) = m.loss_and_grad(&v, &t, true).unwrap();
        let rep = check(&m, &g.unwrap(), 1e-5, |p: &GrnnModel| p.loss_and_grad(&v, &t, false).unwrap().0);
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
    }

    #[test]
    fn wrong_width_is_a_dimension_error() {
        let m = GrnnModel::new(&mut substream(1, "grnn"), 6, 10, 5, 8);
        assert!(matches!(m.initial_state(&[0.0; 5]), Err(Error::Dimension(_))));
    }
}
