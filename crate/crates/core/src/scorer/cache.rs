use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{Dimension, ScoreVector};
use crate::{Error, Result};

/// Tweet id → scores, persisted as JSON lines with fixed six-decimal numbers:
///
/// ```text
/// {"tweet_id":"1","scores":{"toxicity":0.123456,...,"threat":0.000000},"scorer":"lexicon-noisy-or-v1:ab12cd34"}
/// ```
///
/// Entries written by a different scorer id are not served.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCache {
    scorer_id: String,
    entries: BTreeMap<String, ScoreVector>,
    stale: usize,
}

#[derive(Deserialize)]
struct CacheLine {
    tweet_id: String,
    scores: BTreeMap<String, f64>,
    #[serde(default)]
    scorer: Option<String>,
}

impl ScoreCache {
    pub fn new(scorer_id: impl Into<String>) -> Self {
        ScoreCache {
            scorer_id: scorer_id.into(),
            entries: BTreeMap::new(),
            stale: 0,
        }
    }

    pub fn load<R: BufRead>(reader: R, scorer_id: impl Into<String>) -> Result<Self> {
        let mut cache = ScoreCache::new(scorer_id);
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<score cache>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
            if parsed.scorer.as_deref().is_some_and(|s| s != cache.scorer_id) {
                cache.stale += 1;
                continue;
            }
            let mut raw = [0.0; 6];
            for d in Dimension::ALL {
                raw[d.index()] = *parsed.scores.get(d.name()).ok_or_else(|| Error::MalformedLine {
                    line: idx + 1,
                    reason: format!("missing score {}", d.name()),
                })?;
            }
            let (vector, clamped) = ScoreVector::clamped(raw);
            if clamped {
                return Err(Error::MalformedLine {
                    line: idx + 1,
                    reason: "score outside [0,1]".into(),
                });
            }
            cache.entries.insert(parsed.tweet_id, vector);
        }
        Ok(cache)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let scorer = serde_json::to_string(&self.scorer_id).expect("string serializes");
        let mut line = String::new();
        for (id, v) in &self.entries {
            line.clear();
            let id = serde_json::to_string(id).expect("string serializes");
            write!(line, "{{\"tweet_id\":{id},\"scores\":{{").unwrap();
            for (i, d) in Dimension::ALL.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                write!(line, "\"{}\":{:.6}", d.name(), v.get(*d)).unwrap();
            }
            writeln!(line, "}},\"scorer\":{scorer}}}").unwrap();
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn scorer_id(&self) -> &str {
        &self.scorer_id
    }

    pub fn get(&self, tweet_id: &str) -> Option<&ScoreVector> {
        self.entries.get(tweet_id)
    }

    /// First write wins; returns `false` when an existing entry disagrees.
    pub fn insert(&mut self, tweet_id: String, scores: ScoreVector) -> bool {
        match self.entries.get(&tweet_id) {
            Some(existing) => *existing == scores,
            None => {
                self.entries.insert(tweet_id, scores);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lines skipped at load time because another scorer wrote them.
    pub fn stale_entries(&self) -> usize {
        self.stale
    }
}
