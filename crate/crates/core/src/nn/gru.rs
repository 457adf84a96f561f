use ndarray::linalg::general_mat_mul;
use ndarray::{s, Axis, Zip};
use rand::Rng;

use super::{impl_tensors, sigmoid, uniform, Mat};

/// GRU cell, gate layout `[reset, update, candidate]`:
///
/// ```text
/// r = σ(x Wxr + bxr + h Whr + bhr)
/// z = σ(x Wxz + bxz + h Whz + bhz)
/// n = tanh(x Wxn + bxn + r ∘ (h Whn + bhn))
/// h' = (1 - z) ∘ n + z ∘ h
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GruCell {
    pub w_x: Mat,
    pub w_h: Mat,
    pub b_x: Mat,
    pub b_h: Mat,
}
impl_tensors!(GruCell { w_x, w_h, b_x, b_h });

#[derive(Debug, Clone)]
pub struct GruStep {
    x: Mat,
    h_prev: Mat,
    r: Mat,
    z: Mat,
    n: Mat,
    /// `h Whn + bhn`
    gh_n: Mat,
}

impl GruCell {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize) -> Self {
        let scale = 1.0 / (hidden as f64).sqrt();
        GruCell {
            w_x: uniform(rng, input, 3 * hidden, scale),
            w_h: uniform(rng, hidden, 3 * hidden, scale),
            b_x: Mat::zeros((1, 3 * hidden)),
            b_h: Mat::zeros((1, 3 * hidden)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.nrows()
    }

    pub fn step(&self, x: &Mat, h_prev: &Mat) -> (Mat, GruStep) {
        let hd = self.hidden();
        let mut gx = x.dot(&self.w_x);
        gx += &self.b_x;
        let mut gh = h_prev.dot(&self.w_h);
        gh += &self.b_h;

        let r = (&gx.slice(s![.., 0..hd]) + &gh.slice(s![.., 0..hd])).mapv(sigmoid);
        let z = (&gx.slice(s![.., hd..2 * hd]) + &gh.slice(s![.., hd..2 * hd])).mapv(sigmoid);
        let gh_n = gh.slice(s![.., 2 * hd..]).to_owned();
        let n = (&gx.slice(s![.., 2 * hd..]) + &(&r * &gh_n)).mapv(f64::tanh);
        let mut h = n.clone();
        Zip::from(&mut h)
            .and(&z)
            .and(h_prev)
            .for_each(|h, &z, &hp| *h = (1.0 - z) * *h + z * hp);
        let step = GruStep {
            x: x.clone(),
            h_prev: h_prev.clone(),
            r,
            z,
            n,
            gh_n,
        };
        (h, step)
    }

    /// Returns `(dx, dh_prev)`.
    pub fn step_backward(&self, st: &GruStep, dh: &Mat, grad: &mut GruCell) -> (Mat, Mat) {
        let hd = self.hidden();
        let rows = dh.nrows();
        let mut dgx = Mat::zeros((rows, 3 * hd));
        let mut dgh = Mat::zeros((rows, 3 * hd));
        let mut dh_prev = Mat::zeros((rows, hd));

        for b in 0..rows {
            for j in 0..hd {
                let g = dh[[b, j]];
                let (r, z, n) = (st.r[[b, j]], st.z[[b, j]], st.n[[b, j]]);
                let hp = st.h_prev[[b, j]];
                let dn = g * (1.0 - z);
                let dz = g * (hp - n);
                dh_prev[[b, j]] = g * z;
                let dan = dn * (1.0 - n * n);
                let dr = dan * st.gh_n[[b, j]];
                let dar = dr * r * (1.0 - r);
                let daz = dz * z * (1.0 - z);
                dgx[[b, j]] = dar;
                dgx[[b, hd + j]] = daz;
                dgx[[b, 2 * hd + j]] = dan;
                dgh[[b, j]] = dar;
                dgh[[b, hd + j]] = daz;
                dgh[[b, 2 * hd + j]] = dan * r;
            }
        }

        general_mat_mul(1.0, &st.x.t(), &dgx, 1.0, &mut grad.w_x);
        general_mat_mul(1.0, &st.h_prev.t(), &dgh, 1.0, &mut grad.w_h);
        grad.b_x += &dgx.sum_axis(Axis(0)).insert_axis(Axis(0));
        grad.b_h += &dgh.sum_axis(Axis(0)).insert_axis(Axis(0));
        let dx = dgx.dot(&self.w_x.t());
        general_mat_mul(1.0, &dgh, &self.w_h.t(), 1.0, &mut dh_prev);
        (dx, dh_prev)
    }
}
