use crate::sample::OcrToken;
use crate::text::normalize_words;

/// Find the OCR token that answers `answer`.
///
/// Both sides are case-folded and stripped of surrounding punctuation. A
/// single token matches when its words equal the answer's words; otherwise
/// the first contiguous run of tokens (in list order) whose concatenated
/// words equal the answer is merged into one token with the union box.
pub fn answer_matches_ocr(answer: &str, tokens: &[OcrToken]) -> Option<OcrToken> {
    let target = normalize_words(answer);
    if target.is_empty() {
        return None;
    }
    let words: Vec<Vec<String>> = tokens.iter().map(OcrToken::words).collect();
    if let Some(i) = words.iter().position(|w| *w == target) {
        return Some(tokens[i].clone());
    }
    for start in 0..tokens.len() {
        let mut acc: Vec<&str> = Vec::new();
        for end in start..tokens.len() {
            if words[end].is_empty() {
                break;
            }
            acc.extend(words[end].iter().map(String::as_str));
            if acc.len() > target.len() || acc.iter().zip(&target).any(|(a, b)| a != b) {
                break;
            }
            if acc.len() == target.len() && end > start {
                let bbox = tokens[start + 1..=end]
                    .iter()
                    .fold(tokens[start].bbox, |b, t| b.union(&t.bbox));
                let confidence = tokens[start..=end]
                    .iter()
                    .map(|t| t.confidence)
                    .try_fold(f64::INFINITY, |m, c| c.map(|c| m.min(c)));
                return Some(OcrToken {
                    text: tokens[start..=end]
                        .iter()
                        .map(|t| t.text.as_str())
                        .collect::<Vec<_>>()
                        .join(" "),
                    bbox,
                    confidence,
                });
            }
        }
    }
    None
}
