//! Text normalization, topic modeling and readability.

mod lda;
mod readability;
pub mod stem;

use std::collections::HashSet;
use std::io::BufRead;

use serde::Serialize;

use crate::corpus::TweetRecord;
use crate::{Error, Result};

pub use lda::{lda_fit, top_words, GibbsSampler, LdaParams, TopicModel};
pub use readability::{
    ari, count_syllables, flesch, group_readability, readability, ReadabilityMetrics, ReadabilityReport,
};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

pub fn bundled_stopwords() -> HashSet<String> {
    load_stopwords(BUNDLED_STOPWORDS.as_bytes()).expect("bundled stop words are valid")
}

/// Newline-separated lowercase words.
pub fn load_stopwords<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut set = HashSet::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<stopwords>", e))?;
        let w = line.trim();
        if !w.is_empty() {
            set.insert(w.to_lowercase());
        }
    }
    Ok(set)
}

/// Removes every `http://` / `https://` run up to the next whitespace.
pub fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, word) in text.split_whitespace().enumerate() {
        let kept = match (word.find("http://"), word.find("https://")) {
            (Some(a), Some(b)) => &word[..a.min(b)],
            (Some(a), None) | (None, Some(a)) => &word[..a],
            (None, None) => word,
        };
        if i > 0 {
            out.push(' ');
        }
        out.push_str(kept);
    }
    out
}

/// Sentences in one tweet: segments between runs of `.`, `!`, `?` that
/// contain an alphanumeric character. URLs are removed first so their dots
/// do not split sentences.
pub fn count_sentences(text: &str) -> usize {
    strip_urls(text)
        .split(['.', '!', '?'])
        .filter(|seg| seg.chars().any(char::is_alphanumeric))
        .count()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TokenizedDoc {
    pub profile_id: String,
    pub tokens: Vec<String>,
    pub sentence_count: usize,
    /// Whitespace-separated words before stripping, URLs excluded.
    pub raw_words: usize,
    pub raw_chars: usize,
}

/// Lowercased alphanumeric tokens with URLs and stop words removed, stemmed.
pub fn tokenize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let cleaned: String = strip_urls(text)
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned
        .to_lowercase()
        .split_whitespace()
        .filter(|w| !stopwords.contains(*w))
        .map(stem::stem)
        .filter(|w| !w.is_empty())
        .collect()
}

/// One document per profile: the concatenated text of its tweets
/// (retweets dropped unless `include_retweets`).
pub fn normalize(
    profile_id: &str,
    records: &[TweetRecord],
    include_retweets: bool,
    stopwords: &HashSet<String>,
) -> TokenizedDoc {
    let mut doc = TokenizedDoc {
        profile_id: profile_id.to_string(),
        ..Default::default()
    };
    for r in records.iter().filter(|r| include_retweets || !r.is_retweet) {
        doc.sentence_count += count_sentences(&r.text);
        let prose = strip_urls(&r.text);
        for w in prose.split_whitespace() {
            doc.raw_words += 1;
            doc.raw_chars += w.chars().count();
        }
        doc.tokens.extend(tokenize(&r.text, stopwords));
    }
    doc
}
