use std::collections::HashMap;

#[derive(Debug, Clone, Default)]
struct NgramCounts {
    clipped: Vec<usize>,
    total: Vec<usize>,
    cand_len: usize,
    ref_len: usize,
}

fn ngrams(words: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if words.len() >= n {
        for g in words.windows(n) {
            *m.entry(g).or_default() += 1;
        }
    }
    m
}

/// Reference length closest to `c`, ties going to the shorter one.
fn closest_ref_len(c: usize, refs: &[Vec<String>]) -> usize {
    refs.iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

fn counts(candidate: &[String], references: &[Vec<String>], max_n: usize) -> NgramCounts {
    let mut out = NgramCounts {
        clipped: vec![0; max_n],
        total: vec![0; max_n],
        cand_len: candidate.len(),
        ref_len: closest_ref_len(candidate.len(), references),
    };
    for n in 1..=max_n {
        let cand = ngrams(candidate, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in references {
            for (g, c) in ngrams(r, n) {
                let e = max_ref.entry(g).or_default();
                *e = (*e).max(c);
            }
        }
        for (g, c) in cand {
            out.total[n - 1] += c;
            out.clipped[n - 1] += c.min(max_ref.get(g).copied().unwrap_or(0));
        }
    }
    out
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c == 0 {
        0.0
    } else if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Corpus BLEU with clipped n-gram precisions pooled over all pairs, no
/// smoothing. An order with no candidate n-grams anywhere in the corpus
/// (every candidate shorter than n) has precision 1.
pub fn bleu_corpus(pairs: &[super::EvalPair], max_n: usize) -> f64 {
    let max_n = max_n.max(1);
    let mut acc = NgramCounts {
        clipped: vec![0; max_n],
        total: vec![0; max_n],
        ..Default::default()
    };
    for p in pairs {
        let c = counts(&p.candidate, &p.references, max_n);
        for n in 0..max_n {
            acc.clipped[n] += c.clipped[n];
            acc.total[n] += c.total[n];
        }
        acc.cand_len += c.cand_len;
        acc.ref_len += c.ref_len;
    }
    if acc.cand_len == 0 {
        log::warn!("BLEU over an empty candidate corpus is 0");
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..max_n {
        if acc.total[n] == 0 {
            continue;
        }
        if acc.clipped[n] == 0 {
            return 0.0;
        }
        log_sum += (acc.clipped[n] as f64 / acc.total[n] as f64).ln();
    }
    brevity_penalty(acc.cand_len, acc.ref_len) * (log_sum / max_n as f64).exp()
}

/// `[BLEU-1, .., BLEU-max_n]` at corpus level.
pub fn bleu_corpus_up_to(pairs: &[super::EvalPair], max_n: usize) -> Vec<f64> {
    (1..=max_n).map(|n| bleu_corpus(pairs, n)).collect()
}

/// Sentence BLEU with add-one smoothing on the n >= 2 precisions.
pub fn sentence_bleu(candidate: &[String], references: &[Vec<String>], max_n: usize) -> f64 {
    let max_n = max_n.max(1);
    let c = counts(candidate, references, max_n);
    if c.cand_len == 0 || c.clipped[0] == 0 {
        return 0.0;
    }
    let mut log_sum = (c.clipped[0] as f64 / c.total[0] as f64).ln();
    for n in 1..max_n {
        log_sum += ((c.clipped[n] + 1) as f64 / (c.total[n] + 1) as f64).ln();
    }
    brevity_penalty(c.cand_len, c.ref_len) * (log_sum / max_n as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EvalPair;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn short_exact_candidates_score_one() {
        let pairs = [EvalPair::single(w("bus"), w("bus")), EvalPair::single(w("a b"), w("a b"))];
        assert_eq!(bleu_corpus(&pairs, 4), 1.0);
        // A 4-gram present in the corpus but unmatched still zeroes BLEU-4.
        let mixed = [EvalPair::single(w("bus"), w("bus")), EvalPair::single(w("a b c d"), w("a b c e"))];
        assert_eq!(bleu_corpus(&mixed, 4), 0.0);
    }

    #[test]
    fn unigram_precision_example() {
        // clipped unigram matches a, b out of 3; equal lengths so BP = 1
        let pairs = [EvalPair::single(w("a b c"), w("a b d"))];
        assert!((bleu_corpus(&pairs, 1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_match_is_one() {
        let pairs = [
            EvalPair::new(w("what is the brand ?"), vec![w("no"), w("what is the brand ?")]).unwrap(),
            EvalPair::single(w("what does the sign say ?"), w("what does the sign say ?")),
        ];
        assert_eq!(bleu_corpus(&pairs, 4), 1.0);
        assert_eq!(sentence_bleu(&pairs[0].candidate, &pairs[0].references, 4), 1.0);
    }

    #[test]
    fn no_four_gram_overlap_is_zero() {
        let pairs = [EvalPair::single(w("a b c d e"), w("a b c x d e"))];
        assert_eq!(bleu_corpus(&pairs, 4), 0.0);
        assert!(bleu_corpus(&pairs, 3) > 0.0);
        assert!(sentence_bleu(&pairs[0].candidate, &pairs[0].references, 4) > 0.0);
    }

    #[test]
    fn clipping_limits_repeated_words() {
        let pairs = [EvalPair::single(w("the the the"), w("the cat"))];
        assert!((bleu_corpus(&pairs, 1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn brevity_penalty_applies_to_short_candidates() {
        let pairs = [EvalPair::single(w("a b"), w("a b c d"))];
        assert!((bleu_corpus(&pairs, 1) - (1.0f64 - 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_is_zero() {
        assert_eq!(bleu_corpus(&[], 4), 0.0);
        assert_eq!(bleu_corpus(&[EvalPair::single(vec![], w("a"))], 4), 0.0);
    }
}
