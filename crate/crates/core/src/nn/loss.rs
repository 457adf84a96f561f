use super::Mat;

/// Numerically stable log-softmax of one row of logits.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|v| v - lse).collect()
}

/// Weighted softmax cross-entropy over the rows of `logits`.
///
/// Returns `Σ_b weight_b · -log p_b(target_b)` and its gradient w.r.t. the
/// logits. Rows with zero weight contribute nothing.
pub fn softmax_xent(logits: &Mat, targets: &[usize], weights: &[f64]) -> (f64, Mat) {
    let mut grad = Mat::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for (b, row) in logits.rows().into_iter().enumerate() {
        let w = weights[b];
        if w == 0.0 {
            continue;
        }
        let row = row.to_vec();
        let lp = log_softmax(&row);
        loss -= w * lp[targets[b]];
        let mut g = grad.row_mut(b);
        for (k, l) in lp.iter().enumerate() {
            g[k] = w * l.exp();
        }
        g[targets[b]] -= w;
    }
    (loss, grad)
}
