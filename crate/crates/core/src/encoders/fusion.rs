use rand::Rng;

use super::features::{JointFeature, PosFeature, TokenFeature, VisualFeature, POS_DIM};
use crate::error::{Error, Result};
use crate::nn::layers::{TwoLayer, TwoLayerTrace};
use crate::nn::{impl_tensors, Mat};

/// `Ψ = F(W, [φ_o; φ_I; φ_p])` with F two dense layers and tanh between.
#[derive(Debug, Clone, PartialEq)]
pub struct Fusion {
    pub net: TwoLayer,
}
impl_tensors!(Fusion { net });

pub type FusionTrace = TwoLayerTrace;

impl Fusion {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize, output: usize) -> Self {
        Fusion {
            net: TwoLayer::new(rng, input, hidden, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.net.first.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.net.second.output_dim()
    }

    /// Rows of `phi` are concatenated `[φ_o; φ_I; φ_p]` vectors.
    pub fn forward_batch(&self, phi: &Mat) -> Result<(Mat, FusionTrace)> {
        if phi.ncols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "fusion input has {} dims, expected {}",
                phi.ncols(),
                self.input_dim()
            )));
        }
        Ok(self.net.forward(phi))
    }

    pub fn backward_batch(&self, trace: &FusionTrace, dpsi: &Mat, grad: &mut Fusion) -> Mat {
        self.net.backward(trace, dpsi, &mut grad.net)
    }
}

/// `[φ_o; φ_I; φ_p]`
pub fn concat_features(phi_o: &TokenFeature, phi_i: &VisualFeature, phi_p: &PosFeature) -> Vec<f64> {
    let mut v = Vec::with_capacity(phi_o.len() + phi_i.len() + phi_p.len());
    v.extend_from_slice(phi_o.as_slice());
    v.extend_from_slice(phi_i.as_slice());
    v.extend_from_slice(phi_p.as_slice());
    v
}

pub fn fuse(
    phi_o: &TokenFeature,
    phi_i: &VisualFeature,
    phi_p: &PosFeature,
    fusion: &Fusion,
) -> Result<JointFeature> {
    if phi_p.len() != POS_DIM {
        return Err(Error::Dimension(format!(
            "positional feature has {} dims, expected {POS_DIM}",
            phi_p.len()
        )));
    }
    let phi = concat_features(phi_o, phi_i, phi_p);
    let n = phi.len();
    let m = Mat::from_shape_vec((1, n), phi).expect("row vector");
    let (psi, _) = fusion.forward_batch(&m)?;
    JointFeature::with_dim(psi.row(0).to_vec(), fusion.output_dim())
}
