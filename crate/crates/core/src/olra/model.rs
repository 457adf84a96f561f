use ndarray::{concatenate, s, Axis};

use super::config::ModelDims;
use super::inputs::OlraInput;
use crate::encoders::{
    Fusion, FusionTrace, JointFeature, OcrEncoder, OcrEncoderTrace, PosFeature, TokenFeature,
    VisualFeature, POS_DIM,
};
use crate::error::{Error, Result};
use crate::nn::decoder::{beam, greedy, LstmDecoder, LstmDecoderTrace, LstmState, TeacherBatch};
use crate::nn::layers::{Linear, TwoLayer, TwoLayerTrace};
use crate::nn::{impl_tensors, substream, zeros_like, Mat};

/// Per-batch loss terms. `total` is always `l_q + lambda * l_a`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossBreakdown {
    pub l_q: f64,
    pub l_a: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(l_q: f64, l_a: f64, lambda: f64) -> Self {
        LossBreakdown {
            l_q,
            l_a,
            total: total_loss(l_q, l_a, lambda),
        }
    }
}

pub fn total_loss(l_q: f64, l_a: f64, lambda: f64) -> f64 {
    l_q + lambda * l_a
}

/// The three feature vectors of one sample and their fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub phi_i: VisualFeature,
    pub phi_o: TokenFeature,
    pub phi_p: PosFeature,
    pub psi: JointFeature,
}

/// All learnable OLRA weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OlraModel {
    pub encoder: OcrEncoder,
    /// Maps store features to `dims.visual_dim` when the widths differ.
    pub projection: Option<Linear>,
    pub fusion: Fusion,
    /// Reconstruction head `Ψ -> φ̂_o`.
    pub recon: TwoLayer,
    pub decoder: LstmDecoder,
}
impl_tensors!(OlraModel { encoder, projection, fusion, recon, decoder });

struct Forward {
    enc: OcrEncoderTrace,
    visual: Mat,
    fusion: FusionTrace,
    phi_o: Mat,
    psi: Mat,
}

impl OlraModel {
    pub fn new(seed: u64, dims: &ModelDims, visual_in: usize, vocab: usize) -> Self {
        let mut rng = substream(seed, "olra-init");
        let encoder = OcrEncoder::new(&mut rng, dims.word_dim, dims.token_hidden);
        let projection = (visual_in != dims.visual_dim).then(|| Linear::new(&mut rng, visual_in, dims.visual_dim));
        let fused = dims.token_dim() + dims.visual_dim + POS_DIM;
        let fusion = Fusion::new(&mut rng, fused, dims.fusion_hidden, dims.joint_dim);
        let recon = TwoLayer::new(&mut rng, dims.joint_dim, dims.recon_hidden, dims.token_dim());
        let decoder = LstmDecoder::new(&mut rng, vocab, dims.embed_dim, dims.joint_dim);
        OlraModel {
            encoder,
            projection,
            fusion,
            recon,
            decoder,
        }
    }

    pub fn visual_in(&self) -> usize {
        match &self.projection {
            Some(p) => p.input_dim(),
            None => self.fusion.input_dim() - self.encoder.output_dim() - POS_DIM,
        }
    }

    pub fn joint_dim(&self) -> usize {
        self.fusion.output_dim()
    }

    pub fn vocab_size(&self) -> usize {
        self.decoder.vocab_size()
    }

    fn forward(&self, inputs: &[&OlraInput]) -> Result<Forward> {
        if inputs.is_empty() {
            return Err(Error::Invalid("empty batch".into()));
        }
        let vin = self.visual_in();
        for inp in inputs {
            if inp.visual.len() != vin {
                return Err(Error::Dimension(format!(
                    "visual feature has {} dims, model expects {vin}",
                    inp.visual.len()
                )));
            }
            if inp.position.len() != POS_DIM {
                return Err(Error::Dimension(format!(
                    "positional feature has {} dims, expected {POS_DIM}",
                    inp.position.len()
                )));
            }
        }
        let words: Vec<&Mat> = inputs.iter().map(|i| &i.words).collect();
        let (phi_o, enc) = self.encoder.forward_batch(&words)?;
        let b = inputs.len();
        let visual = Mat::from_shape_fn((b, vin), |(r, c)| inputs[r].visual[c]);
        let pos = Mat::from_shape_fn((b, POS_DIM), |(r, c)| inputs[r].position[c]);
        let phi_i = match &self.projection {
            Some(p) => p.forward(&visual),
            None => visual.clone(),
        };
        let phi = concatenate![Axis(1), phi_o, phi_i, pos];
        let (psi, fusion) = self.fusion.forward_batch(&phi)?;
        Ok(Forward {
            enc,
            visual,
            fusion,
            phi_o,
            psi,
        })
    }

    /// Ψ for each input, one row per sample.
    pub fn joint_features(&self, inputs: &[&OlraInput]) -> Result<Mat> {
        Ok(self.forward(inputs)?.psi)
    }

    pub fn features(&self, input: &OlraInput) -> Result<FeatureBundle> {
        let f = self.forward(&[input])?;
        let t = self.encoder.output_dim();
        let v = self.fusion.input_dim() - t - POS_DIM;
        let phi = &f.fusion.input;
        Ok(FeatureBundle {
            phi_o: TokenFeature::with_dim(phi.slice(s![0, ..t]).to_vec(), t)?,
            phi_i: VisualFeature::with_dim(phi.slice(s![0, t..t + v]).to_vec(), v)?,
            phi_p: PosFeature::with_dim(phi.slice(s![0, t + v..]).to_vec(), POS_DIM)?,
            psi: JointFeature::with_dim(f.psi.row(0).to_vec(), self.joint_dim())?,
        })
    }

    pub fn loss(&self, inputs: &[&OlraInput], targets: &[&[usize]], lambda: f64) -> Result<LossBreakdown> {
        Ok(self.run(inputs, targets, lambda, false)?.0)
    }

    /// Loss terms of a batch and the gradient of `total` with respect to
    /// every parameter.
    pub fn loss_and_grad(
        &self,
        inputs: &[&OlraInput],
        targets: &[&[usize]],
        lambda: f64,
    ) -> Result<(LossBreakdown, OlraModel)> {
        let (loss, grad) = self.run(inputs, targets, lambda, true)?;
        Ok((loss, grad.expect("requested")))
    }

    fn run(
        &self,
        inputs: &[&OlraInput],
        targets: &[&[usize]],
        lambda: f64,
        want_grad: bool,
    ) -> Result<(LossBreakdown, Option<OlraModel>)> {
        if inputs.len() != targets.len() {
            return Err(Error::Invalid(format!(
                "{} inputs but {} target sequences",
                inputs.len(),
                targets.len()
            )));
        }
        let v = self.vocab_size();
        if let Some(&id) = targets.iter().flat_map(|t| t.iter()).find(|&&id| id >= v) {
            return Err(Error::IdOutOfRange { id, size: v });
        }
        let batch = TeacherBatch::new(targets)?;
        let f = self.forward(inputs)?;
        let b = inputs.len() as f64;
        let (hat, recon_trace) = self.recon.forward(&f.psi);
        let diff = &f.phi_o - &hat;
        let l_a = diff.iter().map(|d| d * d).sum::<f64>() / b;
        let c0 = Mat::zeros(f.psi.raw_dim());
        let (l_q, dec_trace) = self.decoder.teacher_forced(&f.psi, &c0, &batch);
        let loss = LossBreakdown::new(l_q, l_a, lambda);
        if !want_grad {
            return Ok((loss, None));
        }
        Ok((loss, Some(self.backward(&f, &diff, &recon_trace, &dec_trace, lambda))))
    }

    fn backward(
        &self,
        f: &Forward,
        diff: &Mat,
        recon_trace: &TwoLayerTrace,
        dec_trace: &LstmDecoderTrace,
        lambda: f64,
    ) -> OlraModel {
        let mut g = zeros_like(self);
        let b = f.psi.nrows() as f64;
        // d(λ l_a)/dφ_o = 2λ(φ_o - φ̂_o)/B, and the negation for φ̂_o
        let dphi_o_direct = diff * (2.0 * lambda / b);
        let dhat = -&dphi_o_direct;
        let (mut dpsi, _dc0) = self.decoder.backward(dec_trace, &mut g.decoder);
        dpsi += &self.recon.backward(recon_trace, &dhat, &mut g.recon);
        let dphi = self.fusion.backward_batch(&f.fusion, &dpsi, &mut g.fusion);
        let t = self.encoder.output_dim();
        let vis = self.fusion.input_dim() - t - POS_DIM;
        let dphi_o = &dphi.slice(s![.., ..t]) + &dphi_o_direct;
        self.encoder.backward_batch(&f.enc, &dphi_o, &mut g.encoder);
        if let (Some(p), Some(gp)) = (&self.projection, g.projection.as_mut()) {
            let dphi_i = dphi.slice(s![.., t..t + vis]).to_owned();
            p.backward(&f.visual, &dphi_i, gp);
        }
        g
    }

    /// Greedy (`beam_width <= 1`) or beam decoding of one question.
    pub fn generate(&self, input: &OlraInput, max_len: usize, beam_width: usize) -> Result<Vec<usize>> {
        let psi = self.joint_features(&[input])?;
        let psi = JointFeature::with_dim(psi.row(0).to_vec(), self.joint_dim())?;
        Ok(if beam_width <= 1 {
            generate_question(&psi, self, max_len)
        } else {
            generate_question_beam(&psi, self, max_len, beam_width)
        })
    }
}

fn row(v: &[f64]) -> Mat {
    Mat::from_shape_vec((1, v.len()), v.to_vec()).expect("row vector")
}

fn check_psi(psi: &JointFeature, model: &OlraModel) -> Result<()> {
    if psi.len() != model.joint_dim() {
        return Err(Error::Dimension(format!(
            "joint feature has {} dims, model expects {}",
            psi.len(),
            model.joint_dim()
        )));
    }
    Ok(())
}

/// φ̂_o, the reconstruction head applied to Ψ.
pub fn reconstruct_ocr(psi: &JointFeature, model: &OlraModel) -> Result<Vec<f64>> {
    check_psi(psi, model)?;
    Ok(model.recon.forward(&row(psi.as_slice())).0.row(0).to_vec())
}

/// Squared l2 distance `||φ_o - φ̂_o||²`.
pub fn consistency_loss(phi_o: &[f64], phi_o_hat: &[f64]) -> Result<f64> {
    if phi_o.len() != phi_o_hat.len() {
        return Err(Error::Dimension(format!(
            "token feature has {} dims, reconstruction has {}",
            phi_o.len(),
            phi_o_hat.len()
        )));
    }
    Ok(phi_o.iter().zip(phi_o_hat).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Mean per-token negative log-likelihood of `gt_ids` with Ψ as the
/// decoder's initial hidden state.
pub fn question_nll(psi: &JointFeature, gt_ids: &[usize], model: &OlraModel) -> Result<f64> {
    check_psi(psi, model)?;
    let v = model.vocab_size();
    if let Some(&id) = gt_ids.iter().find(|&&id| id >= v) {
        return Err(Error::IdOutOfRange { id, size: v });
    }
    let batch = TeacherBatch::new(&[gt_ids])?;
    let h0 = row(psi.as_slice());
    let c0 = Mat::zeros(h0.raw_dim());
    Ok(model.decoder.teacher_forced(&h0, &c0, &batch).0)
}

fn init_state(psi: &JointFeature) -> LstmState {
    let h = row(psi.as_slice());
    let c = Mat::zeros(h.raw_dim());
    LstmState { h, c }
}

/// Greedy decoding from `<sos>`: word ids only, at most `max_len` of them.
pub fn generate_question(psi: &JointFeature, model: &OlraModel, max_len: usize) -> Vec<usize> {
    greedy(&model.decoder, init_state(psi), max_len)
}

pub fn generate_question_beam(psi: &JointFeature, model: &OlraModel, max_len: usize, width: usize) -> Vec<usize> {
    beam(&model.decoder, init_state(psi), max_len, width)
}
