//! Central finite-difference gradient checking.

use super::Tensors;

#[derive(Debug, Clone)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub entries: usize,
}

/// Relative error with a small floor so exact-zero gradients compare as 0.
pub fn rel_error(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(1e-6);
    (a - b).abs() / denom
}

/// Compare `analytic` against central differences of `loss` at `params`,
/// perturbing every entry of every tensor by `eps`.
pub fn check<T, F>(params: &T, analytic: &T, eps: f64, loss: F) -> GradCheck
where
    T: Tensors + Clone,
    F: Fn(&T) -> f64,
{
    let names: Vec<(String, usize)> = params
        .named()
        .into_iter()
        .map(|(n, m)| (n, m.len()))
        .collect();
    let grads: Vec<Vec<f64>> = analytic
        .named()
        .into_iter()
        .map(|(_, m)| m.iter().copied().collect())
        .collect();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        entries: 0,
    };
    let mut probe = params.clone();
    for (t, ((name, len), grad)) in names.iter().zip(&grads).enumerate() {
        assert_eq!(grad.len(), *len, "analytic gradient shape differs for {name}");
        for (k, &a) in grad.iter().enumerate() {
            let orig = nth(&probe, t, k);
            set_nth(&mut probe, t, k, orig + eps);
            let up = loss(&probe);
            set_nth(&mut probe, t, k, orig - eps);
            let down = loss(&probe);
            set_nth(&mut probe, t, k, orig);
            let numeric = (up - down) / (2.0 * eps);
            let err = rel_error(a, numeric);
            report.entries += 1;
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst_param = name.clone();
                report.worst_index = k;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    report
}

fn nth<T: Tensors>(t: &T, tensor: usize, k: usize) -> f64 {
    let named = t.named();
    *named[tensor].1.iter().nth(k).expect("index in range")
}

fn set_nth<T: Tensors>(t: &mut T, tensor: usize, k: usize, value: f64) {
    let mut idx = 0;
    t.visit_mut(&mut |m| {
        if idx == tensor {
            *m.iter_mut().nth(k).expect("index in range") = value;
        }
        idx += 1;
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Mat;

    #[test]
    fn quadratic_gradient_checks() {
        let p = ndarray::array![[1.0, -2.0, 0.5]];
        let g = p.mapv(|v| 2.0 * v);
        let r = check(&p, &g, 1e-5, |m: &Mat| m.iter().map(|v| v * v).sum());
        assert!(r.max_rel_error < 1e-8, "{r:?}");

        let wrong = p.mapv(|v| 3.0 * v);
        let r = check(&p, &wrong, 1e-5, |m: &Mat| m.iter().map(|v| v * v).sum());
        assert!(r.max_rel_error > 0.1);
    }
}
