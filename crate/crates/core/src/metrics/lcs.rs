/// ROUGE-L recall weight.
pub const ROUGE_BETA: f64 = 1.2;

pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F-measure `(1 + β²) P R / (R + β² P)`; 0 for empty input.
pub fn rouge_l(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_length(candidate, reference) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let p = lcs / candidate.len() as f64;
    let r = lcs / reference.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + b2) * p * r / (r + b2 * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    /// Exhaustive subsequence search, exponential but fine for tiny inputs.
    fn lcs_brute(a: &[u8], b: &[u8]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let sub: Vec<u8> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
            let mut it = b.iter();
            if sub.iter().all(|c| it.any(|d| d == c)) {
                best = best.max(sub.len());
            }
        }
        best
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_length(&w("a b"), &[]), 0);
        assert_eq!(lcs_length(&w("a b c"), &w("a b c")), 3);
        assert_eq!(lcs_length(&w("a b c d"), &w("b d")), 2);
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_l(&w("what is it"), &w("what is it")), 1.0);
        let f = rouge_l(&w("a b c d"), &w("a c d"));
        assert!((f - 2.44 * 0.75 / (1.0 + 1.44 * 0.75)).abs() < 1e-12);
        assert!((f - 0.8798).abs() < 1e-4);
        assert_eq!(rouge_l(&w("a b"), &w("c d")), 0.0);
        assert_eq!(rouge_l(&[], &w("c d")), 0.0);
    }

    proptest! {
        #[test]
        fn lcs_matches_brute_force(a in proptest::collection::vec(0u8..3, 0..9),
                                   b in proptest::collection::vec(0u8..3, 0..9)) {
            let l = lcs_length(&a, &b);
            prop_assert_eq!(l, lcs_brute(&a, &b));
            prop_assert_eq!(l, lcs_length(&b, &a));
            prop_assert!(l <= a.len().min(b.len()));
        }
    }
}
