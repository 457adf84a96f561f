use ndarray::linalg::general_mat_mul;
use ndarray::{s, Axis};
use rand::Rng;

use super::{add_into, impl_tensors, sigmoid, uniform, Mat};

/// LSTM cell with gate layout `[input, forget, candidate, output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    /// `in x 4H`
    pub w_x: Mat,
    /// `H x 4H`
    pub w_h: Mat,
    /// `1 x 4H`
    pub b: Mat,
}
impl_tensors!(LstmCell { w_x, w_h, b });

#[derive(Debug, Clone)]
pub struct LstmStep {
    x: Mat,
    h_prev: Mat,
    c_prev: Mat,
    /// activated gates, `B x 4H`
    gates: Mat,
    tanh_c: Mat,
    /// `B x 1` continuation mask, `None` means every row advances.
    mask: Option<Mat>,
}

/// Trace of a full (possibly masked) recurrence.
#[derive(Debug, Clone)]
pub struct LstmRun {
    pub steps: Vec<LstmStep>,
    /// Hidden state after every step.
    pub hs: Vec<Mat>,
    pub h: Mat,
    pub c: Mat,
}

impl LstmCell {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize) -> Self {
        let scale = 1.0 / (hidden as f64).sqrt();
        let mut b = Mat::zeros((1, 4 * hidden));
        b.slice_mut(s![.., hidden..2 * hidden]).fill(1.0);
        LstmCell {
            w_x: uniform(rng, input, 4 * hidden, scale),
            w_h: uniform(rng, hidden, 4 * hidden, scale),
            b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.nrows()
    }

    pub fn step(&self, x: &Mat, h_prev: &Mat, c_prev: &Mat) -> (Mat, Mat, LstmStep) {
        let hd = self.hidden();
        let mut z = x.dot(&self.w_x);
        general_mat_mul(1.0, h_prev, &self.w_h, 1.0, &mut z);
        z += &self.b;
        z.slice_mut(s![.., 0..2 * hd]).mapv_inplace(sigmoid);
        z.slice_mut(s![.., 2 * hd..3 * hd]).mapv_inplace(f64::tanh);
        z.slice_mut(s![.., 3 * hd..]).mapv_inplace(sigmoid);

        let i = z.slice(s![.., 0..hd]);
        let f = z.slice(s![.., hd..2 * hd]);
        let g = z.slice(s![.., 2 * hd..3 * hd]);
        let o = z.slice(s![.., 3 * hd..]);
        let c = &f * c_prev + &i * &g;
        let tanh_c = c.mapv(f64::tanh);
        let h = &o * &tanh_c;
        let step = LstmStep {
            x: x.clone(),
            h_prev: h_prev.clone(),
            c_prev: c_prev.clone(),
            gates: z,
            tanh_c,
            mask: None,
        };
        (h, c, step)
    }

    /// Backward through one step given `dL/dh` and `dL/dc` of its outputs.
    /// Returns `(dx, dh_prev, dc_prev)`.
    pub fn step_backward(
        &self,
        st: &LstmStep,
        dh: &Mat,
        dc: &Mat,
        grad: &mut LstmCell,
    ) -> (Mat, Mat, Mat) {
        let hd = self.hidden();
        let i = st.gates.slice(s![.., 0..hd]);
        let f = st.gates.slice(s![.., hd..2 * hd]);
        let g = st.gates.slice(s![.., 2 * hd..3 * hd]);
        let o = st.gates.slice(s![.., 3 * hd..]);

        let mut dc_total = dc.clone();
        ndarray::Zip::from(&mut dc_total)
            .and(dh)
            .and(&o)
            .and(&st.tanh_c)
            .for_each(|d, &dh, &o, &tc| *d += dh * o * (1.0 - tc * tc));

        let mut dz = Mat::zeros(st.gates.raw_dim());
        ndarray::Zip::from(dz.slice_mut(s![.., 0..hd]))
            .and(&dc_total)
            .and(&g)
            .and(&i)
            .for_each(|d, &dc, &g, &i| *d = dc * g * i * (1.0 - i));
        ndarray::Zip::from(dz.slice_mut(s![.., hd..2 * hd]))
            .and(&dc_total)
            .and(&st.c_prev)
            .and(&f)
            .for_each(|d, &dc, &cp, &f| *d = dc * cp * f * (1.0 - f));
        ndarray::Zip::from(dz.slice_mut(s![.., 2 * hd..3 * hd]))
            .and(&dc_total)
            .and(&i)
            .and(&g)
            .for_each(|d, &dc, &i, &g| *d = dc * i * (1.0 - g * g));
        ndarray::Zip::from(dz.slice_mut(s![.., 3 * hd..]))
            .and(dh)
            .and(&st.tanh_c)
            .and(&o)
            .for_each(|d, &dh, &tc, &o| *d = dh * tc * o * (1.0 - o));

        general_mat_mul(1.0, &st.x.t(), &dz, 1.0, &mut grad.w_x);
        general_mat_mul(1.0, &st.h_prev.t(), &dz, 1.0, &mut grad.w_h);
        grad.b += &dz.sum_axis(Axis(0)).insert_axis(Axis(0));

        let dx = dz.dot(&self.w_x.t());
        let dh_prev = dz.dot(&self.w_h.t());
        let dc_prev = &dc_total * &f;
        (dx, dh_prev, dc_prev)
    }

    /// Run over `xs`. With `masks`, a row whose mask is 0 at step t keeps its
    /// previous state, so padded positions leave the final state untouched.
    pub fn run(&self, xs: &[Mat], masks: Option<&[Mat]>, h0: &Mat, c0: &Mat) -> LstmRun {
        let mut h = h0.clone();
        let mut c = c0.clone();
        let mut steps = Vec::with_capacity(xs.len());
        let mut hs = Vec::with_capacity(xs.len());
        for (t, x) in xs.iter().enumerate() {
            let (h_new, c_new, mut st) = self.step(x, &h, &c);
            match masks {
                Some(ms) => {
                    let m = &ms[t];
                    let keep = m.mapv(|v| 1.0 - v);
                    h = &h_new * m + &h * &keep;
                    c = &c_new * m + &c * &keep;
                    st.mask = Some(m.clone());
                }
                None => {
                    h = h_new;
                    c = c_new;
                }
            }
            hs.push(h.clone());
            steps.push(st);
        }
        LstmRun { steps, hs, h, c }
    }

    /// Backward through [`LstmCell::run`]. `dhs[t]`, when given, is the
    /// gradient flowing into the hidden output of step t from above.
    /// Returns `(dxs, dh0, dc0)`.
    pub fn run_backward(
        &self,
        run: &LstmRun,
        dhs: Option<&[Mat]>,
        dh_final: &Mat,
        dc_final: &Mat,
        grad: &mut LstmCell,
    ) -> (Vec<Mat>, Mat, Mat) {
        let mut dh = dh_final.clone();
        let mut dc = dc_final.clone();
        let mut dxs = vec![Mat::zeros((0, 0)); run.steps.len()];
        for t in (0..run.steps.len()).rev() {
            if let Some(d) = dhs {
                add_into(&mut dh, &d[t]);
            }
            let st = &run.steps[t];
            match &st.mask {
                Some(m) => {
                    let keep = m.mapv(|v| 1.0 - v);
                    let dh_new = &dh * m;
                    let dc_new = &dc * m;
                    let (dx, dh_prev, dc_prev) = self.step_backward(st, &dh_new, &dc_new, grad);
                    dh = dh_prev + &(&dh * &keep);
                    dc = dc_prev + &(&dc * &keep);
                    dxs[t] = dx;
                }
                None => {
                    let (dx, dh_prev, dc_prev) = self.step_backward(st, &dh, &dc, grad);
                    dh = dh_prev;
                    dc = dc_prev;
                    dxs[t] = dx;
                }
            }
        }
        (dxs, dh, dc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::substream;
    use ndarray::array;

    #[test]
    fn single_step_matches_scalar_equations() {
        // hidden 1, input 1: gates computed by hand
        let cell = LstmCell {
            w_x: array![[0.5, -0.3, 0.8, 0.1]],
            w_h: array![[0.2, 0.4, -0.6, 0.7]],
            b: array![[0.0, 1.0, 0.1, -0.2]],
        };
        let (x, h0, c0) = (0.9, -0.4, 0.3);
        let i = sigmoid(0.5 * x + 0.2 * h0);
        let f = sigmoid(-0.3 * x + 0.4 * h0 + 1.0);
        let g = (0.8 * x - 0.6 * h0 + 0.1f64).tanh();
        let o = sigmoid(0.1 * x + 0.7 * h0 - 0.2);
        let c = f * c0 + i * g;
        let h = o * c.tanh();
        let (hh, cc, _) = cell.step(&array![[x]], &array![[h0]], &array![[c0]]);
        assert!((hh[[0, 0]] - h).abs() < 1e-15);
        assert!((cc[[0, 0]] - c).abs() < 1e-15);
    }

    #[test]
    fn masked_rows_keep_state() {
        let mut rng = substream(1, "lstm");
        let cell = LstmCell::new(&mut rng, 3, 4);
        let x = uniform(&mut rng, 2, 3, 1.0);
        let h0 = Mat::zeros((2, 4));
        let masks = vec![array![[1.0], [1.0]], array![[1.0], [0.0]]];
        let run = cell.run(&[x.clone(), x.clone()], Some(&masks), &h0, &h0);
        let single = cell.run(&[x.slice(s![1..2, ..]).to_owned()], None, &h0.slice(s![1..2, ..]).to_owned(), &h0.slice(s![1..2, ..]).to_owned());
        assert_eq!(run.h.row(1), single.h.row(0));
    }
}
