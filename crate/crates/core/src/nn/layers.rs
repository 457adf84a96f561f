use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{impl_tensors, uniform, Mat};

/// Affine map `y = x W + b` on row-major batches.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// `in x out`
    pub w: Mat,
    /// `1 x out`
    pub b: Mat,
}
impl_tensors!(Linear { w, b });

impl Linear {
    pub fn new(rng: &mut impl Rng, input: usize, output: usize) -> Self {
        let scale = 1.0 / (input as f64).sqrt();
        Linear {
            w: uniform(rng, input, output, scale),
            b: Mat::zeros((1, output)),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: &Mat) -> Mat {
        let mut y = x.dot(&self.w);
        y += &self.b;
        y
    }

    /// Accumulates weight gradients into `grad` and returns `dL/dx`.
    pub fn backward(&self, x: &Mat, dy: &Mat, grad: &mut Linear) -> Mat {
        general_mat_mul(1.0, &x.t(), dy, 1.0, &mut grad.w);
        grad.b += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        dy.dot(&self.w.t())
    }
}

/// Elementwise nonlinearity used between dense layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, x: &Mat) -> Mat {
        match self {
            Activation::Tanh => x.mapv(f64::tanh),
            Activation::Identity => x.clone(),
        }
    }

    /// Gradient through the activation given its output `y`.
    pub fn backward(self, y: &Mat, dy: &Mat) -> Mat {
        match self {
            Activation::Tanh => {
                let mut d = dy.clone();
                d.zip_mut_with(y, |g, &v| *g *= 1.0 - v * v);
                d
            }
            Activation::Identity => dy.clone(),
        }
    }
}

/// Two dense layers with an elementwise activation in between:
/// `y = L2(act(L1(x)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayer {
    pub first: Linear,
    pub second: Linear,
}
impl_tensors!(TwoLayer { first, second });

#[derive(Debug, Clone)]
pub struct TwoLayerTrace {
    pub input: Mat,
    pub hidden: Mat,
}

impl TwoLayer {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize, output: usize) -> Self {
        TwoLayer {
            first: Linear::new(rng, input, hidden),
            second: Linear::new(rng, hidden, output),
        }
    }

    pub fn forward(&self, x: &Mat) -> (Mat, TwoLayerTrace) {
        let hidden = Activation::Tanh.apply(&self.first.forward(x));
        let y = self.second.forward(&hidden);
        (
            y,
            TwoLayerTrace {
                input: x.clone(),
                hidden,
            },
        )
    }

    pub fn backward(&self, trace: &TwoLayerTrace, dy: &Mat, grad: &mut TwoLayer) -> Mat {
        let dhidden = self.second.backward(&trace.hidden, dy, &mut grad.second);
        let dpre = Activation::Tanh.backward(&trace.hidden, &dhidden);
        self.first.backward(&trace.input, &dpre, &mut grad.first)
    }
}

/// Lookup table of row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// `vocab x dim`
    pub table: Mat,
}
impl_tensors!(Embedding { table });

impl Embedding {
    pub fn new(rng: &mut impl Rng, vocab: usize, dim: usize) -> Self {
        Embedding {
            table: uniform(rng, vocab, dim, 0.1),
        }
    }

    pub fn dim(&self) -> usize {
        self.table.ncols()
    }

    pub fn forward(&self, ids: &[usize]) -> Mat {
        let mut out = Array2::zeros((ids.len(), self.dim()));
        for (mut row, &id) in out.rows_mut().into_iter().zip(ids) {
            row.assign(&self.table.row(id));
        }
        out
    }

    pub fn backward(&self, ids: &[usize], dy: &Mat, grad: &mut Embedding) {
        for (row, &id) in dy.rows().into_iter().zip(ids) {
            let mut g = grad.table.row_mut(id);
            g += &row;
        }
    }
}
