use super::{Mat, Tensors};

/// Adam with bias correction. Moment buffers follow the parameter visit
/// order, so one optimizer instance belongs to one parameter set.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Vec<Mat>,
    v: Vec<Mat>,
}

impl Default for Adam {
    fn default() -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

impl Adam {
    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn update<T: Tensors>(&mut self, params: &mut T, grads: &T, lr: f64) {
        let grads: Vec<&Mat> = grads.named().into_iter().map(|(_, g)| g).collect();
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| Mat::zeros(g.raw_dim())).collect();
            self.v = self.m.clone();
        }
        assert_eq!(grads.len(), self.m.len(), "parameter set changed under the optimizer");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let mut idx = 0;
        let (ms, vs) = (&mut self.m, &mut self.v);
        params.visit_mut(&mut |p| {
            let g = grads[idx];
            ndarray::Zip::from(p)
                .and(&mut ms[idx])
                .and(&mut vs[idx])
                .and(g)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let mhat = *m / bc1;
                    let vhat = *v / bc2;
                    *p -= lr * mhat / (vhat.sqrt() + eps);
                });
            idx += 1;
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Mat::from_elem((1, 2), 1.0);
        let g = ndarray::array![[0.5, -2.0]];
        let mut opt = Adam::default();
        opt.update(&mut p, &g, 0.1);
        assert!((p[[0, 0]] - 0.9).abs() < 1e-6);
        assert!((p[[0, 1]] - 1.1).abs() < 1e-6);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = Mat::from_elem((1, 1), 3.0);
        let mut opt = Adam::default();
        for _ in 0..2000 {
            let g = p.mapv(|v| 2.0 * (v - 1.0));
            opt.update(&mut p, &g, 0.01);
        }
        assert!((p[[0, 0]] - 1.0).abs() < 1e-3);
    }
}
