use std::collections::HashSet;

use serde::Serialize;

use super::{count_sentences, strip_urls};
use crate::{Error, Result};

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel groups (a, e, i, o, u, y), less one for a silent final `e` that is
/// not a consonant + `le` ending; at least 1.
pub fn count_syllables(word: &str) -> Result<usize> {
    if word.is_empty() {
        return Err(Error::EmptyInput {
            what: "count_syllables",
        });
    }
    let chars: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = chars.len();
    if n >= 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        let consonant_le = chars[n - 2] == 'l' && n >= 3 && !is_vowel(chars[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

/// Flesch reading ease from total counts.
pub fn flesch(words: usize, sentences: usize, syllables: usize) -> f64 {
    206.835 - 1.015 * (words as f64 / sentences as f64) - 84.6 * (syllables as f64 / words as f64)
}

/// Automated readability index from total character, word and sentence counts.
pub fn ari(characters: usize, words: usize, sentences: usize) -> f64 {
    4.71 * (characters as f64 / words as f64) + 0.5 * (words as f64 / sentences as f64) - 21.43
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadabilityMetrics {
    pub sentences: usize,
    pub words: usize,
    pub unique_words: usize,
    pub characters: usize,
    pub syllables: usize,
    pub richness: f64,
    pub flesch: f64,
    pub ari: f64,
}

/// Readability over a profile's tweets. A word is a whitespace-separated
/// token (URLs excluded) holding at least one alphanumeric character; its
/// length counts alphanumerics only, and uniqueness compares that lowercase
/// alphanumeric form.
pub fn readability<'a>(texts: impl IntoIterator<Item = &'a str>) -> Result<ReadabilityMetrics> {
    let (mut sentences, mut words, mut characters, mut syllables) = (0, 0, 0, 0);
    let mut unique = HashSet::new();
    for text in texts {
        sentences += count_sentences(text);
        for token in strip_urls(text).split_whitespace() {
            let core: String = token
                .chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect();
            if core.is_empty() {
                continue;
            }
            words += 1;
            characters += core.chars().count();
            let letters: String = core.chars().filter(|c| c.is_alphabetic()).collect();
            syllables += if letters.is_empty() {
                1
            } else {
                count_syllables(&letters)?
            };
            unique.insert(core);
        }
    }
    if words == 0 {
        return Err(Error::EmptyInput {
            what: "readability (words)",
        });
    }
    if sentences == 0 {
        return Err(Error::EmptyInput {
            what: "readability (sentences)",
        });
    }
    Ok(ReadabilityMetrics {
        sentences,
        words,
        unique_words: unique.len(),
        characters,
        syllables,
        richness: unique.len() as f64 / words as f64,
        flesch: flesch(words, sentences, syllables),
        ari: ari(characters, words, sentences),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReadabilityReport {
    pub n_profiles: usize,
    pub avg_sentences: f64,
    pub avg_richness: f64,
    pub avg_flesch: f64,
    pub avg_ari: f64,
}

/// Per-profile metrics averaged over the group.
pub fn group_readability(profiles: &[ReadabilityMetrics]) -> ReadabilityReport {
    let n = profiles.len();
    if n == 0 {
        return ReadabilityReport::default();
    }
    let avg = |f: fn(&ReadabilityMetrics) -> f64| profiles.iter().map(f).sum::<f64>() / n as f64;
    ReadabilityReport {
        n_profiles: n,
        avg_sentences: avg(|m| m.sentences as f64),
        avg_richness: avg(|m| m.richness),
        avg_flesch: avg(|m| m.flesch),
        avg_ari: avg(|m| m.ari),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn syllable_heuristic() {
        assert_eq!(count_syllables("cat").unwrap(), 1);
        assert_eq!(count_syllables("hello").unwrap(), 2);
        assert_eq!(count_syllables("table").unwrap(), 2);
        assert_eq!(count_syllables("cake").unwrap(), 1);
        assert_eq!(count_syllables("the").unwrap(), 1);
        assert_eq!(count_syllables("free").unwrap(), 1);
        assert_eq!(count_syllables("hmm").unwrap(), 1);
        assert_eq!(count_syllables("readability").unwrap(), 5);
        assert!(count_syllables("").is_err());
    }

    #[test]
    fn ari_of_the_cat_sat() {
        let m = readability(["the cat sat"]).unwrap();
        assert!((m.ari - -5.80).abs() < 1e-9);
        assert_eq!(m.richness, 1.0);
    }

    #[test]
    fn flesch_formula() {
        assert!((flesch(10, 1, 15) - 69.785).abs() < 1e-9);
    }

    #[test]
    fn empty_text_is_error() {
        assert!(readability(["... !!!"]).is_err());
        assert!(readability(std::iter::empty()).is_err());
    }

    #[test]
    fn group_average() {
        let a = readability(["one two three"]).unwrap();
        let b = readability(["one one. two"]).unwrap();
        let r = group_readability(&[a.clone(), b.clone()]);
        assert_eq!(r.n_profiles, 2);
        assert!((r.avg_sentences - 1.5).abs() < 1e-12);
        assert!((r.avg_richness - (a.richness + b.richness) / 2.0).abs() < 1e-12);
        assert_eq!(group_readability(&[]), ReadabilityReport::default());
    }

    proptest! {
        #[test]
        fn order_invariant(mut tweets in proptest::collection::vec("[a-z]{1,6}( [a-z]{1,6}){0,5}[.!?]?", 1..8)) {
            let a = readability(tweets.iter().map(String::as_str)).unwrap();
            tweets.reverse();
            let b = readability(tweets.iter().map(String::as_str)).unwrap();
            prop_assert_eq!(a.words, b.words);
            prop_assert_eq!(a.unique_words, b.unique_words);
            prop_assert!((a.flesch - b.flesch).abs() < 1e-9 && (a.ari - b.ari).abs() < 1e-9);
        }

        #[test]
        fn duplication_halves_richness(tweets in proptest::collection::vec("[a-z]{1,6}( [a-z]{1,6}){0,5}", 1..8)) {
            let once = readability(tweets.iter().map(String::as_str)).unwrap();
            let twice = readability(tweets.iter().chain(&tweets).map(String::as_str)).unwrap();
            prop_assert!((twice.richness - once.richness / 2.0).abs() < 1e-12);
        }
    }
}
