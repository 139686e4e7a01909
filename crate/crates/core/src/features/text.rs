//! Tokenization, phrases and anchors.

use std::collections::BTreeMap;

use crate::domain::builtin::ORDINAL_WORDS;
use crate::knowledge::{State, Value};

const NUMBER_WORDS: [&str; 20] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty",
];

/// Words ignored when turning identifier names into phrases.
pub const NAME_STOPWORDS: [&str; 6] = ["in", "to", "of", "the", "a", "an"];

/// Lowercases and splits on anything that is not a letter or digit.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Crude plural stripping, used only when stemming is switched on.
pub fn stem(token: &str) -> String {
    if token.len() > 4 && token.ends_with("ies") {
        format!("{}y", &token[..token.len() - 3])
    } else if token.len() > 3 && token.ends_with('s') && !token.ends_with("ss") {
        token[..token.len() - 1].to_string()
    } else {
        token.to_string()
    }
}

/// `sizeInBytes` → `[size, in, bytes]`, `ShippingContainer` → `[shipping, container]`.
pub fn split_identifier(name: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if !c.is_alphanumeric() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        cur.extend(c.to_lowercase());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Unigram and bigram counts over `tokens`; `None` entries break bigrams and
/// are never emitted.
pub fn phrase_counts(tokens: &[Option<String>]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (i, t) in tokens.iter().enumerate() {
        let Some(t) = t else { continue };
        *out.entry(t.clone()).or_insert(0.0) += 1.0;
        if let Some(Some(next)) = tokens.get(i + 1) {
            *out.entry(format!("{t} {next}")).or_insert(0.0) += 1.0;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnchorKind {
    Digits,
    NumberWord,
    Ordinal,
    Text,
}

/// A value evoked by a span of utterance tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Anchor {
    pub start: usize,
    pub end: usize,
    pub value: Value,
    pub kind: AnchorKind,
}

impl Anchor {
    /// Bit mask of the covered tokens (tokens past 128 share the last bit).
    pub fn mask(&self) -> u128 {
        (self.start..self.end).fold(0u128, |m, i| m | 1u128 << i.min(127))
    }
}

pub fn number_word(token: &str) -> Option<i64> {
    NUMBER_WORDS.iter().position(|w| *w == token).map(|i| i as i64 + 1)
}

pub fn ordinal_word(token: &str) -> Option<i64> {
    ORDINAL_WORDS.iter().position(|w| *w == token).map(|i| i as i64 + 1)
}

/// Integer anchors from digits, number words and ordinals, plus text anchors
/// for token sequences equal to a text value of the state.
pub fn find_anchors(tokens: &[String], state: &State) -> Vec<Anchor> {
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let int = |value: i64, kind| Anchor {
            start: i,
            end: i + 1,
            value: Value::Int(value),
            kind,
        };
        if t.chars().all(|c| c.is_ascii_digit()) {
            if let Ok(v) = t.parse::<i64>() {
                out.push(int(v, AnchorKind::Digits));
            }
        } else if let Some(v) = number_word(t) {
            out.push(int(v, AnchorKind::NumberWord));
        } else if let Some(v) = ordinal_word(t) {
            out.push(int(v, AnchorKind::Ordinal));
        }
    }
    for text in state.text_values() {
        let needle = tokenize(&text);
        if needle.is_empty() || needle.len() > tokens.len() {
            continue;
        }
        for start in 0..=tokens.len() - needle.len() {
            if tokens[start..start + needle.len()] == needle[..] {
                out.push(Anchor {
                    start,
                    end: start + needle.len(),
                    value: Value::Text(text.clone()),
                    kind: AnchorKind::Text,
                });
            }
        }
    }
    out.sort();
    out
}
