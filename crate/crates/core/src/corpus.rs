//! Timeline ingestion from JSON-lines files.
//!
//! One record per line:
//!
//! ```text
//! {"tweet_id":"1","profile_id":"u1","created_at":"2019-05-01T13:00:00Z","text":"...",
//!  "lang":"en","is_retweet":false,"hashtags":["maga"],"urls":["https://example.com/a"]}
//! ```
//!
//! `hashtags` and `urls` are optional; when absent they are recovered from the
//! text with [`extract_hashtags`] and [`extract_urls`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub profile_id: String,
    #[serde(serialize_with = "serialize_instant")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub lang: String,
    pub is_retweet: bool,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
}

fn serialize_instant<S: serde::Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_instant(t))
}

/// `2019-05-01T13:00:00Z`
pub fn format_instant(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses an ISO-8601 instant and normalizes it to UTC at second resolution.
pub fn parse_instant(s: &str) -> Option<DateTime<Utc>> {
    let t = DateTime::parse_from_rfc3339(s.trim()).ok()?.with_timezone(&Utc);
    t.with_nanosecond(0)
}

#[derive(Deserialize)]
struct RawRecord {
    tweet_id: String,
    profile_id: String,
    created_at: String,
    text: String,
    lang: String,
    is_retweet: bool,
    #[serde(default)]
    hashtags: Option<Vec<String>>,
    #[serde(default)]
    urls: Option<Vec<String>>,
}

impl RawRecord {
    fn validate(self) -> std::result::Result<TweetRecord, String> {
        let created_at =
            parse_instant(&self.created_at).ok_or_else(|| format!("unparseable created_at {:?}", self.created_at))?;
        if self.tweet_id.is_empty() {
            return Err("empty tweet_id".into());
        }
        if self.profile_id.is_empty() {
            return Err("empty profile_id".into());
        }
        let hashtags = match self.hashtags {
            Some(tags) => tags
                .into_iter()
                .map(|t| {
                    let t = t.strip_prefix('#').unwrap_or(&t).to_lowercase();
                    if t.is_empty() || t.starts_with('#') || t.chars().any(char::is_whitespace) {
                        Err(format!("invalid hashtag {t:?}"))
                    } else {
                        Ok(t)
                    }
                })
                .collect::<std::result::Result<Vec<_>, _>>()?,
            None => extract_hashtags(&self.text),
        };
        let urls = match self.urls {
            Some(urls) => urls,
            None => extract_urls(&self.text),
        };
        Ok(TweetRecord {
            tweet_id: self.tweet_id,
            profile_id: self.profile_id,
            created_at,
            text: self.text,
            lang: self.lang,
            is_retweet: self.is_retweet,
            hashtags,
            urls,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub source: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DuplicateLine {
    pub source: String,
    pub line: usize,
    pub tweet_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestionLog {
    /// Non-blank lines seen.
    pub lines_read: usize,
    pub valid: usize,
    pub skipped: Vec<SkippedLine>,
    pub duplicates: Vec<DuplicateLine>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub sources: Vec<String>,
    pub records_read: usize,
    pub skipped: usize,
    pub deduplicated: usize,
}

/// Immutable, per-profile, time-ordered view of a timeline collection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    profiles: BTreeMap<String, Vec<TweetRecord>>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Builds a corpus from already-validated records. Duplicate ids keep the
    /// first occurrence.
    pub fn from_records(records: impl IntoIterator<Item = TweetRecord>) -> Self {
        let mut ingestor = Ingestor::new(false);
        for r in records {
            ingestor.push_record(r, "<memory>", 0);
        }
        ingestor.finish().0
    }

    pub fn profile(&self, profile_id: &str) -> Option<&[TweetRecord]> {
        self.profiles.get(profile_id).map(Vec::as_slice)
    }

    pub fn profiles(&self) -> impl Iterator<Item = (&str, &[TweetRecord])> {
        self.profiles.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn profile_ids(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }

    pub fn tweets(&self) -> impl Iterator<Item = &TweetRecord> {
        self.profiles.values().flatten()
    }

    pub fn n_profiles(&self) -> usize {
        self.profiles.len()
    }

    pub fn n_tweets(&self) -> usize {
        self.profiles.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Writes the corpus back out as JSON lines, profile by profile in time
    /// order. Structured `hashtags`/`urls` are always emitted.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.tweets() {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Accumulates records from one or more sources into a [`Corpus`].
#[derive(Debug)]
pub struct Ingestor {
    strict: bool,
    seen: HashSet<String>,
    profiles: BTreeMap<String, Vec<TweetRecord>>,
    log: IngestionLog,
    sources: Vec<String>,
}

impl Ingestor {
    pub fn new(strict: bool) -> Self {
        Ingestor {
            strict,
            seen: HashSet::new(),
            profiles: BTreeMap::new(),
            log: IngestionLog::default(),
            sources: Vec::new(),
        }
    }

    /// Reads every line of `source`. In strict mode the first malformed or
    /// duplicate line aborts with its 1-based line number.
    pub fn ingest<R: BufRead>(&mut self, source: R, name: &str) -> Result<()> {
        self.sources.push(name.to_string());
        for (idx, line) in source.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            self.log.lines_read += 1;
            let parsed = serde_json::from_str::<RawRecord>(&line)
                .map_err(|e| e.to_string())
                .and_then(RawRecord::validate);
            match parsed {
                Ok(record) => {
                    if self.strict && self.seen.contains(&record.tweet_id) {
                        return Err(Error::DuplicateTweet {
                            line: lineno,
                            tweet_id: record.tweet_id,
                        });
                    }
                    self.push_record(record, name, lineno);
                }
                Err(reason) if self.strict => return Err(Error::MalformedLine { line: lineno, reason }),
                Err(reason) => self.log.skipped.push(SkippedLine {
                    source: name.to_string(),
                    line: lineno,
                    reason,
                }),
            }
        }
        Ok(())
    }

    fn push_record(&mut self, record: TweetRecord, name: &str, lineno: usize) {
        if !self.seen.insert(record.tweet_id.clone()) {
            self.log.duplicates.push(DuplicateLine {
                source: name.to_string(),
                line: lineno,
                tweet_id: record.tweet_id,
            });
            return;
        }
        self.log.valid += 1;
        self.profiles.entry(record.profile_id.clone()).or_default().push(record);
    }

    pub fn finish(mut self) -> (Corpus, IngestionLog) {
        for records in self.profiles.values_mut() {
            records.sort_by(|a, b| {
                a.created_at
                    .cmp(&b.created_at)
                    .then_with(|| a.tweet_id.cmp(&b.tweet_id))
            });
        }
        let provenance = Provenance {
            sources: self.sources,
            records_read: self.log.lines_read,
            skipped: self.log.skipped.len(),
            deduplicated: self.log.duplicates.len(),
        };
        (
            Corpus {
                profiles: self.profiles,
                provenance,
            },
            self.log,
        )
    }
}

/// Parses a single JSON-lines stream.
pub fn parse_timeline_stream<R: BufRead>(source: R, strict: bool) -> Result<(Corpus, IngestionLog)> {
    let mut ingestor = Ingestor::new(strict);
    ingestor.ingest(source, "<stream>")?;
    Ok(ingestor.finish())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eligibility {
    pub min_tweets: usize,
    pub lang: String,
    pub include_retweets: bool,
}

impl Default for Eligibility {
    fn default() -> Self {
        Eligibility {
            min_tweets: 10,
            lang: "en".to_string(),
            include_retweets: true,
        }
    }
}

impl Eligibility {
    pub fn admits(&self, record: &TweetRecord) -> bool {
        record.lang == self.lang && (self.include_retweets || !record.is_retweet)
    }
}

/// Profiles with at least `min_tweets` records matching the language and
/// retweet policy. A `min_tweets` of 0 behaves as 1.
pub fn filter_eligible_profiles(corpus: &Corpus, rule: &Eligibility) -> BTreeSet<String> {
    let min = rule.min_tweets.max(1);
    corpus
        .profiles()
        .filter(|(_, records)| records.iter().filter(|r| rule.admits(r)).count() >= min)
        .map(|(id, _)| id.to_string())
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased word-character runs following `#`, in order of appearance.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find('#') {
        let after = &rest[pos + 1..];
        let end = after
            .char_indices()
            .find(|&(_, c)| !is_word_char(c))
            .map_or(after.len(), |(i, _)| i);
        if end > 0 {
            tags.push(after[..end].to_lowercase());
        }
        rest = &after[end..];
    }
    tags
}

/// Substrings starting with `http://` or `https://` up to the next whitespace.
pub fn extract_urls(text: &str) -> Vec<String> {
    let mut urls = Vec::new();
    let mut rest = text;
    loop {
        let next = match (rest.find("http://"), rest.find("https://")) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => break,
        };
        let tail = &rest[next..];
        let end = tail.find(char::is_whitespace).unwrap_or(tail.len());
        urls.push(tail[..end].to_string());
        rest = &tail[end..];
    }
    urls
}
