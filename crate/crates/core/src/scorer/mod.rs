//! Six-dimension misbehavior scoring.
//!
//! Scores come from a [`Scorer`] backend: the deterministic [`Lexicon`]
//! scorer, or a [`RemoteScorer`] speaking the Perspective-style request
//! format. [`score_corpus`] consults a [`ScoreCache`] first so reruns never
//! re-query the backend.

mod cache;
mod lexicon;
mod remote;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::{Corpus, TweetRecord};

pub use cache::ScoreCache;
pub use lexicon::{score_text_lexicon, Lexicon, LEXICON_SCORER_ID};
pub use remote::{Clock, RemoteScorer, RetryPolicy, SystemClock, TokenBucket, Transport, DEFAULT_REQUESTS_PER_MINUTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Toxicity,
    SevereToxicity,
    IdentityAttack,
    Inflammatory,
    Insult,
    Threat,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Toxicity,
        Dimension::SevereToxicity,
        Dimension::IdentityAttack,
        Dimension::Inflammatory,
        Dimension::Insult,
        Dimension::Threat,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Toxicity => "toxicity",
            Dimension::SevereToxicity => "severe_toxicity",
            Dimension::IdentityAttack => "identity_attack",
            Dimension::Inflammatory => "inflammatory",
            Dimension::Insult => "insult",
            Dimension::Threat => "threat",
        }
    }

    /// Attribute name used by Perspective-compatible services.
    pub fn attribute(self) -> &'static str {
        match self {
            Dimension::Toxicity => "TOXICITY",
            Dimension::SevereToxicity => "SEVERE_TOXICITY",
            Dimension::IdentityAttack => "IDENTITY_ATTACK",
            Dimension::Inflammatory => "INFLAMMATORY",
            Dimension::Insult => "INSULT",
            Dimension::Threat => "THREAT",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Dimension::ALL
            .into_iter()
            .find(|d| d.name() == wanted)
            .ok_or_else(|| crate::Error::invalid(format!("unknown dimension {s:?}")))
    }
}

impl<'de> serde::Deserialize<'de> for Dimension {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rounds to six decimals, half-to-even on the exact binary value.
pub fn quantize(x: f64) -> f64 {
    format!("{x:.6}").parse().expect("formatted float parses")
}

/// Six unit-interval scores, stored at the cache's six-decimal precision so
/// that freshly computed and reloaded vectors compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreVector([f64; 6]);

impl ScoreVector {
    pub const ZERO: ScoreVector = ScoreVector([0.0; 6]);

    /// Clamps every entry into `[0, 1]` (NaN becomes 0) and quantizes.
    /// The flag reports whether any clamping happened.
    pub fn clamped(raw: [f64; 6]) -> (ScoreVector, bool) {
        let mut clamped = false;
        let values = raw.map(|v| {
            let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            clamped |= c != v || v.is_nan();
            quantize(c)
        });
        (ScoreVector(values), clamped)
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        self.0[dim.index()]
    }

    pub fn values(&self) -> &[f64; 6] {
        &self.0
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScorerError {
    /// Worth retrying: timeouts, rate limiting, 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Permanent(String),
}

pub trait Scorer: Sync {
    /// Identifies backend and model version; recorded in caches and reports.
    fn id(&self) -> String;

    /// Raw per-dimension scores in [`Dimension::ALL`] order. Out-of-range
    /// values are clamped by the caller.
    fn score(&self, text: &str) -> Result<[f64; 6], ScorerError>;
}

#[derive(Debug, Clone)]
pub struct ScoredCorpus<'c> {
    pub corpus: &'c Corpus,
    pub scores: BTreeMap<String, ScoreVector>,
    pub scorer_id: String,
}

impl<'c> ScoredCorpus<'c> {
    pub fn score(&self, tweet_id: &str) -> Option<&ScoreVector> {
        self.scores.get(tweet_id)
    }

    /// Scored records of one profile, in time order.
    pub fn profile_scores<'a>(
        &'a self,
        profile_id: &str,
    ) -> impl Iterator<Item = (&'c TweetRecord, &'a ScoreVector)> + 'a {
        self.corpus
            .profile(profile_id)
            .unwrap_or(&[])
            .iter()
            .filter_map(move |r| self.scores.get(&r.tweet_id).map(|s| (r, s)))
    }

    pub fn scored_tweets<'a>(&'a self) -> impl Iterator<Item = (&'c TweetRecord, &'a ScoreVector)> + 'a {
        self.corpus
            .tweets()
            .filter_map(move |r| self.scores.get(&r.tweet_id).map(|s| (r, s)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScoreLog {
    pub considered: usize,
    pub cache_hits: usize,
    pub scorer_calls: usize,
    pub failures: Vec<(String, String)>,
    pub clamped: Vec<String>,
}

/// Scores every record accepted by `admit`, consulting `cache` first and
/// inserting fresh results into it. A backend failure drops that tweet and is
/// logged; the run continues.
pub fn score_corpus<'c, S: Scorer + ?Sized>(
    corpus: &'c Corpus,
    scorer: &S,
    cache: &mut ScoreCache,
    admit: impl Fn(&TweetRecord) -> bool,
) -> (ScoredCorpus<'c>, ScoreLog) {
    let mut log = ScoreLog::default();
    let mut scores = BTreeMap::new();
    let mut misses = Vec::new();
    for record in corpus.tweets().filter(|r| admit(r)) {
        log.considered += 1;
        match cache.get(&record.tweet_id) {
            Some(v) => {
                log.cache_hits += 1;
                scores.insert(record.tweet_id.clone(), *v);
            }
            None => misses.push(record),
        }
    }
    log.scorer_calls = misses.len();

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        misses.par_iter().map(|r| scorer.score(&r.text)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = misses.iter().map(|r| scorer.score(&r.text)).collect();

    for (record, result) in misses.into_iter().zip(results) {
        match result {
            Ok(raw) => {
                let (vector, clamped) = ScoreVector::clamped(raw);
                if clamped {
                    log.clamped.push(record.tweet_id.clone());
                }
                cache.insert(record.tweet_id.clone(), vector);
                scores.insert(record.tweet_id.clone(), vector);
            }
            Err(e) => log.failures.push((record.tweet_id.clone(), e.to_string())),
        }
    }
    (
        ScoredCorpus {
            corpus,
            scores,
            scorer_id: scorer.id(),
        },
        log,
    )
}
