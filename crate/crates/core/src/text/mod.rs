//! Sentence segmentation, tokenization, vocabularies and word-vector tables.

mod embedding;
mod vocab;

pub use embedding::{embed, load_embeddings, EmbeddingError, EmbeddingTable, OOV_INIT_BOUND};
pub use vocab::{build_vocabulary, Vocabulary, PAD, PAD_ID, UNK, UNK_ID};

use serde::{Deserialize, Serialize};

/// A sentence and its position in the source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub index: usize,
}

/// Tokens that never end a sentence even when followed by whitespace.
const ABBREVIATIONS: &[&str] = &["dr.", "mr.", "mrs.", "ms.", "u.s.", "e.g.", "i.e.", "etc."];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

/// True when the word ending at `end` (exclusive byte offset, the last char
/// being a '.') is one of the guarded abbreviations.
fn ends_with_abbreviation(text: &str, end: usize) -> bool {
    let start = text[..end]
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = text[start..end]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits text into sentences on '.', '!' or '?' followed by whitespace.
///
/// Closing quotes and brackets directly after the terminator stay with the
/// sentence. A period that ends a guarded abbreviation ("Dr.", "U.S.", ...)
/// never breaks.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        // Swallow runs like "?!" and trailing closers.
        let mut j = i + 1;
        while j < chars.len() && (is_terminator(chars[j].1) || is_closer(chars[j].1)) {
            j += 1;
        }
        let at_boundary = j >= chars.len() || chars[j].1.is_whitespace();
        if at_boundary {
            let guarded = c == '.' && j == i + 1 && ends_with_abbreviation(text, pos + c.len_utf8());
            if !guarded {
                let end = if j < chars.len() { chars[j].0 } else { text.len() };
                pieces.push(&text[start..end]);
                start = end;
            }
        }
        i = j;
    }
    pieces.push(&text[start..]);

    pieces
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(index, s)| Sentence {
            text: s.to_string(),
            index,
        })
        .collect()
}

/// Lowercases and splits on whitespace and punctuation.
///
/// A hyphen with alphanumeric characters on both sides stays inside the
/// token ("covid-19"); every other non-alphanumeric character becomes a
/// token of its own.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let lower = chunk.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if c.is_alphanumeric() {
                current.push(c);
                continue;
            }
            let intra_hyphen = c == '-' && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if intra_hyphen {
                current.push(c);
                continue;
            }
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Tokens that carry at least one letter or digit.
pub fn content_tokens(sentence: &str) -> Vec<String> {
    tokenize(sentence)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect()
}
