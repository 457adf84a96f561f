//! Tokenization and the question vocabulary.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: &str = "<pad>";
pub const SOS: &str = "<sos>";
pub const EOS: &str = "<eos>";
pub const UNK: &str = "<unk>";

pub const PAD_ID: usize = 0;
pub const SOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const UNK_ID: usize = 3;

pub const RESERVED: [&str; 4] = [PAD, SOS, EOS, UNK];

/// Default question length budget, in words.
pub const MAX_QUESTION_LEN: usize = 20;

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Lowercase and split `text` into words.
///
/// Punctuation becomes its own token, except hyphens and apostrophes that sit
/// between two alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if c.is_whitespace() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else if is_joiner(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push(c);
        } else {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            out.push(c.to_string());
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn is_punct_token(tok: &str) -> bool {
    !tok.chars().any(char::is_alphanumeric)
}

/// Tokenize and drop punctuation tokens at either end. Used wherever two
/// strings are compared for equality (answers against OCR tokens).
pub fn normalize_words(text: &str) -> Vec<String> {
    let toks = tokenize(text);
    let start = toks.iter().position(|t| !is_punct_token(t));
    let end = toks.iter().rposition(|t| !is_punct_token(t));
    match (start, end) {
        (Some(s), Some(e)) => toks[s..=e].to_vec(),
        _ => Vec::new(),
    }
}

pub fn normalize(text: &str) -> String {
    normalize_words(text).join(" ")
}

/// Bidirectional token/id map. Ids 0..4 are the reserved tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn reserved_only() -> Self {
        Self::from_tokens(RESERVED.iter().map(|s| s.to_string()).collect())
            .expect("reserved tokens form a valid vocabulary")
    }

    /// Rebuild from a token list in id order. The first four entries must be
    /// the reserved tokens.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len() || tokens[..4].iter().zip(RESERVED).any(|(a, b)| a != b)
        {
            return Err(Error::Invalid(
                "vocabulary must start with <pad>, <sos>, <eos>, <unk>".into(),
            ));
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary entry '{t}'")));
            }
        }
        Ok(Vocabulary { tokens, ids })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_reserved(id: usize) -> bool {
        id < RESERVED.len()
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(d)?;
        Vocabulary::from_tokens(tokens).map_err(serde::de::Error::custom)
    }
}

/// Words with frequency >= `min_count`, ordered by frequency (descending)
/// then lexicographically, after the reserved tokens.
pub fn build_vocab<'a, I, Q>(questions: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = Q>,
    Q: IntoIterator<Item = &'a String>,
{
    let min_count = min_count.max(1);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for q in questions {
        for w in q {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(w, c)| c >= min_count && !RESERVED.contains(&w))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    tokens.extend(entries.into_iter().map(|(w, _)| w.to_string()));
    Vocabulary::from_tokens(tokens).expect("counted words are unique")
}

/// `<sos> ids.. <eos>`, keeping at most `max_len` words.
pub fn encode_question(question: &[String], vocab: &Vocabulary, max_len: usize) -> Vec<usize> {
    let max_len = max_len.max(1);
    let mut ids = Vec::with_capacity(question.len().min(max_len) + 2);
    ids.push(SOS_ID);
    ids.extend(question.iter().take(max_len).map(|w| vocab.id_or_unk(w)));
    ids.push(EOS_ID);
    ids
}

/// Inverse of [`encode_question`]: skips `<sos>`/`<pad>` and stops at the
/// first `<eos>`.
pub fn decode_ids(ids: &[usize], vocab: &Vocabulary) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for &id in ids {
        let tok = vocab.token(id).ok_or(Error::IdOutOfRange {
            id,
            size: vocab.len(),
        })?;
        match id {
            EOS_ID => break,
            SOS_ID | PAD_ID => continue,
            _ => out.push(tok.to_string()),
        }
    }
    Ok(out)
}
