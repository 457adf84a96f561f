//! Maximum-entropy next-word model over sparse context indicators.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::nn::decoder::StepDecoder;
use crate::nn::loss::{log_softmax, softmax_xent};
use crate::nn::{impl_tensors, Mat};
use crate::text::{Vocabulary, SOS};

pub const BIAS_FEATURE: &str = "bias";

/// Active indicators for one prediction step: the bias, one per history
/// position (`h1` is the previous word), one per distinct OCR word and one
/// per distinct object tag. Values are 1 unless `ocr_weights` scales an OCR
/// word.
pub fn melm_context_features(
    history: &[String],
    ocr_tokens: &[String],
    object_tags: &[String],
    n: usize,
) -> BTreeMap<String, f64> {
    melm_context_features_scaled(history, ocr_tokens, None, object_tags, n)
}

pub fn melm_context_features_scaled(
    history: &[String],
    ocr_tokens: &[String],
    ocr_weights: Option<&[f64]>,
    object_tags: &[String],
    n: usize,
) -> BTreeMap<String, f64> {
    let mut f = BTreeMap::new();
    f.insert(BIAS_FEATURE.to_string(), 1.0);
    for (k, w) in history.iter().rev().take(n.max(1)).enumerate() {
        f.insert(format!("h{}={w}", k + 1), 1.0);
    }
    for (i, t) in ocr_tokens.iter().enumerate() {
        let v = ocr_weights.and_then(|w| w.get(i).copied()).unwrap_or(1.0);
        let e = f.entry(format!("ocr={t}")).or_insert(v);
        *e = e.max(v);
    }
    for t in object_tags.iter().collect::<BTreeSet<_>>() {
        f.insert(format!("tag={t}"), 1.0);
    }
    f
}

/// Weights `features x vocab`; one row per known indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct MelmModel {
    pub weights: Mat,
    pub features: Vec<String>,
    pub history: usize,
    index: HashMap<String, usize>,
}
impl_tensors!(MelmModel { weights });

/// Per-sample context that stays fixed while decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct MelmContext {
    pub ocr_words: Vec<String>,
    pub ocr_weights: Option<Vec<f64>>,
    pub tags: Vec<String>,
}

/// Sparse feature vector as `(row, value)` pairs.
pub type SparseFeatures = Vec<(usize, f64)>;

impl MelmModel {
    /// Zero-initialized model over `features`.
    pub fn new(features: Vec<String>, vocab: usize, history: usize) -> Self {
        let index = features.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        MelmModel {
            weights: Mat::zeros((features.len(), vocab)),
            features,
            history,
            index,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.weights.ncols()
    }

    /// Indicators of `ctx` known to the model; unseen ones are dropped.
    pub fn encode(&self, history: &[String], ctx: &MelmContext) -> SparseFeatures {
        melm_context_features_scaled(history, &ctx.ocr_words, ctx.ocr_weights.as_deref(), &ctx.tags, self.history)
            .into_iter()
            .filter_map(|(name, v)| self.index.get(&name).map(|&i| (i, v)))
            .collect()
    }

    pub fn logits(&self, feats: &SparseFeatures) -> Vec<f64> {
        let mut out = vec![0.0; self.vocab_size()];
        for &(i, v) in feats {
            for (o, w) in out.iter_mut().zip(self.weights.row(i)) {
                *o += v * w;
            }
        }
        out
    }

    pub fn next_word_probs(&self, feats: &SparseFeatures) -> Vec<f64> {
        log_softmax(&self.logits(feats)).into_iter().map(f64::exp).collect()
    }

    /// Mean NLL over `events` `(features, target)` and its gradient.
    pub fn loss_and_grad(&self, events: &[(SparseFeatures, usize)], want_grad: bool) -> (f64, Option<MelmModel>) {
        let n = events.len().max(1) as f64;
        let mut logits = Mat::zeros((events.len(), self.vocab_size()));
        for (r, (feats, _)) in events.iter().enumerate() {
            let l = self.logits(feats);
            logits.row_mut(r).iter_mut().zip(l).for_each(|(d, s)| *d = s);
        }
        let targets: Vec<usize> = events.iter().map(|e| e.1).collect();
        let weights = vec![1.0 / n; events.len()];
        let (loss, dlogits) = softmax_xent(&logits, &targets, &weights);
        if !want_grad {
            return (loss, None);
        }
        let mut grad = MelmModel::new(Vec::new(), self.vocab_size(), self.history);
        grad.weights = Mat::zeros(self.weights.raw_dim());
        for (r, (feats, _)) in events.iter().enumerate() {
            for &(i, v) in feats {
                let mut row = grad.weights.row_mut(i);
                row.scaled_add(v, &dlogits.row(r));
            }
        }
        (loss, Some(grad))
    }

    /// Teacher-forced events of one `<sos> .. <eos>` sequence.
    pub fn events(&self, target: &[usize], ctx: &MelmContext, vocab: &Vocabulary) -> Vec<(SparseFeatures, usize)> {
        let mut history = vec![SOS.to_string()];
        let mut out = Vec::with_capacity(target.len().saturating_sub(1));
        for &next in &target[1..] {
            out.push((self.encode(&history, ctx), next));
            history.push(vocab.token(next).unwrap_or(crate::text::UNK).to_string());
        }
        out
    }
}

/// Collects the indicator names seen in training, sorted.
pub fn collect_features<'a>(
    contexts: impl IntoIterator<Item = (&'a [usize], &'a MelmContext)>,
    vocab: &Vocabulary,
    history: usize,
) -> Vec<String> {
    let mut names = BTreeSet::new();
    for (target, ctx) in contexts {
        let mut hist = vec![SOS.to_string()];
        for &next in &target[1..] {
            names.extend(melm_context_features(&hist, &ctx.ocr_words, &ctx.tags, history).into_keys());
            hist.push(vocab.token(next).unwrap_or(crate::text::UNK).to_string());
        }
    }
    names.into_iter().collect()
}

/// `exp` of the mean NLL of the training tokens under their own unigram
/// frequencies.
pub fn unigram_perplexity(targets: &[Vec<usize>]) -> f64 {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n = 0usize;
    for t in targets {
        for &id in &t[1..] {
            *counts.entry(id).or_default() += 1;
            n += 1;
        }
    }
    if n == 0 {
        return 1.0;
    }
    let nll: f64 = counts
        .values()
        .map(|&c| -(c as f64) * (c as f64 / n as f64).ln())
        .sum::<f64>()
        / n as f64;
    nll.exp()
}

/// Decoding view of a MELM model for one sample; the state is the word
/// history.
pub struct MelmDecoder<'a> {
    pub model: &'a MelmModel,
    pub ctx: &'a MelmContext,
    pub vocab: &'a Vocabulary,
}

impl StepDecoder for MelmDecoder<'_> {
    type State = Vec<String>;

    fn next(&self, history: &Vec<String>, prev: usize) -> (Vec<f64>, Vec<String>) {
        let mut h = history.clone();
        h.push(self.vocab.token(prev).unwrap_or(crate::text::UNK).to_string());
        let lp = log_softmax(&self.model.logits(&self.model.encode(&h, self.ctx)));
        (lp, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::check;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn feature_template_examples() {
        let f = melm_context_features(&w("what is"), &w("inta"), &w("aircraft"), 2);
        assert_eq!(f.len(), 5);
        assert_eq!(f.keys().filter(|k| *k != BIAS_FEATURE).count(), 4);
        assert!(f.contains_key("h1=is") && f.contains_key("h2=what"));
        assert!(f.contains_key("ocr=inta") && f.contains_key("tag=aircraft"));

        let empty = melm_context_features(&[], &[], &[], 2);
        assert_eq!(empty.keys().collect::<Vec<_>>(), vec![BIAS_FEATURE]);

        let dup = melm_context_features(&[], &[], &w("bus bus street"), 2);
        assert_eq!(dup.len(), 3);
        let long = melm_context_features(&w("a b c d"), &[], &[], 2);
        assert_eq!(long.len(), 3);
    }

    fn toy_model() -> (MelmModel, Vec<(SparseFeatures, usize)>) {
        let feats: Vec<String> = ["bias", "h1=<sos>", "h1=what", "ocr=inta", "tag=bus"].map(String::from).to_vec();
        let mut m = MelmModel::new(feats, 7, 2);
        let mut rng = crate::nn::substream(3, "melm");
        m.weights = crate::nn::uniform(&mut rng, 5, 7, 1.0);
        let events = vec![
            (vec![(0, 1.0), (1, 1.0), (3, 0.5)], 4),
            (vec![(0, 1.0), (2, 1.0), (4, 1.0)], 5),
            (vec![(0, 1.0)], 2),
        ];
        (m, events)
    }

    #[test]
    fn gradient_check() {
        let (m, events) = toy_model();
        let (_, g) = m.loss_and_grad(&events, true);
        let rep = check(&m, &g.unwrap(), 1e-5, |p: &MelmModel| p.loss_and_grad(&events, false).0);
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
    }

    proptest! {
        #[test]
        fn next_word_probabilities_sum_to_one(seed in 0u64..500, mask in 0u8..32) {
            let (mut m, _) = toy_model();
            m.weights = crate::nn::uniform(&mut crate::nn::substream(seed, "w"), 5, 7, 20.0);
            let feats: SparseFeatures = (0..5).filter(|i| mask & (1 << i) != 0).map(|i| (i, 1.0)).collect();
            let p = m.next_word_probs(&feats);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn unigram_perplexity_by_counting() {
        // tokens after <sos>: a b <eos> a <eos> -> counts a:2 b:1 eos:2 of 5
        let t = vec![vec![1, 4, 5, 2], vec![1, 4, 2]];
        let want = (-(2.0 * (0.4f64).ln() + (0.2f64).ln() + 2.0 * (0.4f64).ln()) / 5.0).exp();
        assert!((unigram_perplexity(&t) - want).abs() < 1e-12);
    }
}
