//! Synthetic timeline generator with planted consistently-hostile profiles.
//!
//! Planted profiles put two strongly scoring lexicon tokens in every tweet and
//! post around the clock at near-fixed gaps (under a minute, 5, 10, 15 or 20
//! minutes). Everyone else writes mostly benign text at irregular, diurnal,
//! weekday-skewed times.

use std::collections::BTreeSet;

use chrono::{DateTime, Datelike, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{extract_hashtags, extract_urls, Corpus, TweetRecord};
use crate::scorer::Lexicon;

const FOCUS_WORDS: &[&str] = &[
    "border",
    "nation",
    "election",
    "media",
    "vote",
    "country",
    "patriots",
    "government",
    "invasion",
    "rigged",
    "corrupt",
    "elites",
    "globalists",
    "truth",
    "wake",
    "fight",
    "agenda",
    "control",
    "freedom",
    "taxes",
    "crime",
    "flag",
    "enemy",
    "lies",
];

const BENIGN_WORDS: &[&str] = &[
    "coffee", "morning", "weekend", "music", "game", "family", "friends", "dinner", "movie", "book", "walk", "weather",
    "sunny", "rain", "happy", "birthday", "team", "season", "travel", "beach", "city", "garden", "recipe", "pizza",
    "concert", "photo", "dog", "cat", "school", "work", "project", "meeting", "holiday", "summer", "winter", "running",
    "gym", "lunch", "podcast", "episode", "show", "series", "guitar", "song", "album", "coding", "learning", "class",
    "museum", "park", "train", "flight", "vacation", "tea", "cake", "sunset", "mountain", "river", "festival",
    "market",
];

const FOCUS_TAGS: &[&str] = &["maga", "buildthewall", "qanon", "wwg1wga", "redpill", "patriots"];

const BENIGN_TAGS: &[&str] = &[
    "music",
    "nba",
    "travel",
    "foodie",
    "mondaymotivation",
    "photography",
    "tbt",
    "gameofthrones",
    "worldcup",
    "fitness",
    "love",
    "art",
    "books",
    "movies",
    "coffee",
    "weekend",
    "summer",
    "tech",
    "python",
    "rustlang",
    "nature",
    "dogsoftwitter",
    "catsoftwitter",
    "news",
    "science",
    "health",
    "fashion",
    "style",
    "gaming",
    "esports",
];

const FOCUS_DOMAINS: &[&str] = &["breitbart.com", "thegatewaypundit.com", "infowars.com", "bitchute.com"];

const BENIGN_DOMAINS: &[&str] = &[
    "nytimes.com",
    "bbc.co.uk",
    "youtube.com",
    "instagram.com",
    "spotify.com",
    "github.com",
    "medium.com",
    "wikipedia.org",
    "theguardian.com",
    "espn.com",
    "imdb.com",
    "reddit.com",
    "twitch.tv",
    "washingtonpost.com",
    "cnn.com",
    "abc.net.au",
    "nature.com",
    "arxiv.org",
    "bandcamp.com",
    "soundcloud.com",
    "etsy.com",
    "amazon.com",
    "flickr.com",
    "vimeo.com",
    "npr.org",
];

/// Gap choices in minutes for planted profiles; each gets up to one minute of
/// jitter, so a gap stays inside its one-minute bin.
const FOCUS_GAPS: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

/// Relative weekday activity for baseline profiles, Monday first.
const WEEKDAY_WEIGHTS: [f64; 7] = [1.0, 1.05, 1.1, 1.05, 1.0, 0.75, 0.7];

const SPAN_DAYS: i64 = 180;

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    /// Profile ids of the planted profiles.
    pub planted: BTreeSet<String>,
}

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 1, 6, 0, 0, 0).unwrap()
}

/// Tokens scoring at least 0.45 on every dimension, sorted.
fn hostile_tokens(lexicon: &Lexicon) -> Vec<String> {
    let mut v: Vec<String> = lexicon
        .tokens()
        .filter(|t| lexicon.get(t).is_some_and(|w| w.iter().all(|x| *x >= 0.45)))
        .map(str::to_string)
        .collect();
    v.sort();
    v
}

fn mild_tokens(lexicon: &Lexicon) -> Vec<String> {
    let hostile = hostile_tokens(lexicon);
    let mut v: Vec<String> = lexicon
        .tokens()
        .filter(|t| !hostile.iter().any(|h| h == t))
        .map(str::to_string)
        .collect();
    v.sort();
    v
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &'a [&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn diurnal_weight(hour: u32) -> f64 {
    1.0 + 0.9 * (2.0 * std::f64::consts::PI * (hour as f64 - 15.0) / 24.0).cos()
}

fn weighted_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

struct Builder {
    profile: String,
    n: usize,
    out: Vec<TweetRecord>,
}

impl Builder {
    fn push(&mut self, created_at: DateTime<Utc>, text: String, lang: &str, is_retweet: bool) {
        self.out.push(TweetRecord {
            tweet_id: format!("{}-{:05}", self.profile, self.n),
            profile_id: self.profile.clone(),
            created_at,
            hashtags: extract_hashtags(&text),
            urls: extract_urls(&text),
            text,
            lang: lang.to_string(),
            is_retweet,
        });
        self.n += 1;
    }
}

fn focus_text<R: Rng>(rng: &mut R, hostile: &[String]) -> String {
    let a = rng.gen_range(0..hostile.len());
    let mut b = rng.gen_range(0..hostile.len() - 1);
    if b >= a {
        b += 1;
    }
    let mut words = vec![hostile[a].clone(), hostile[b].clone()];
    for _ in 0..rng.gen_range(3..7) {
        words.push(pick(rng, FOCUS_WORDS).to_string());
    }
    words.shuffle(rng);
    let mut text = words.join(" ");
    if rng.gen_bool(0.5) {
        text.push_str(&format!(" #{}", pick(rng, FOCUS_TAGS)));
    }
    if rng.gen_bool(0.3) {
        text.push_str(&format!(
            " https://{}/{}",
            pick(rng, FOCUS_DOMAINS),
            rng.gen_range(100..999)
        ));
    }
    text.push('!');
    text
}

fn benign_text<R: Rng>(rng: &mut R, hostile: &[String], mild: &[String]) -> String {
    let mut words: Vec<String> = (0..rng.gen_range(5..13))
        .map(|_| pick(rng, BENIGN_WORDS).to_string())
        .collect();
    if rng.gen_bool(0.1) {
        let pool = if rng.gen_bool(0.5) { hostile } else { mild };
        if !pool.is_empty() {
            let at = rng.gen_range(0..words.len());
            words[at] = pool[rng.gen_range(0..pool.len())].clone();
        }
    }
    let mut text = words.join(" ");
    text.push(if rng.gen_bool(0.2) { '?' } else { '.' });
    if rng.gen_bool(0.3) {
        text.push_str(&format!(" #{}", pick(rng, BENIGN_TAGS)));
    }
    if rng.gen_bool(0.25) {
        text.push_str(&format!(
            " https://www.{}/p/{}",
            pick(rng, BENIGN_DOMAINS),
            rng.gen_range(1000..9999)
        ));
    }
    text
}

/// Two round-the-clock sessions of 24 hours each, at least two days apart.
fn focus_profile<R: Rng>(rng: &mut R, id: &str, hostile: &[String]) -> Vec<TweetRecord> {
    let mut b = Builder {
        profile: id.to_string(),
        n: 0,
        out: Vec::new(),
    };
    let first_day = rng.gen_range(0..SPAN_DAYS / 2);
    let days = [first_day, first_day + rng.gen_range(2..SPAN_DAYS / 2)];
    for day in days {
        let start = epoch() + Duration::days(day) + Duration::seconds(rng.gen_range(0..86_400));
        let end = start + Duration::hours(24);
        let mut t = start;
        while t < end {
            b.push(t, focus_text(rng, hostile), "en", false);
            let base = FOCUS_GAPS[rng.gen_range(0..FOCUS_GAPS.len())];
            let jitter = if base == 0.0 {
                rng.gen_range(3..57)
            } else {
                rng.gen_range(0..57)
            };
            t += Duration::seconds((base * 60.0) as i64 + jitter);
        }
    }
    b.out
}

fn random_instant<R: Rng>(rng: &mut R) -> DateTime<Utc> {
    let hours: Vec<f64> = (0..24).map(diurnal_weight).collect();
    loop {
        let day = rng.gen_range(0..SPAN_DAYS);
        let date = epoch() + Duration::days(day);
        let w = WEEKDAY_WEIGHTS[date.weekday().num_days_from_monday() as usize];
        if rng.gen_range(0.0..1.2) < w {
            let hour = weighted_index(rng, &hours) as i64;
            return date + Duration::hours(hour) + Duration::seconds(rng.gen_range(0..3600));
        }
    }
}

fn random_profile<R: Rng>(rng: &mut R, id: &str, hostile: &[String], mild: &[String]) -> Vec<TweetRecord> {
    let mut b = Builder {
        profile: id.to_string(),
        n: 0,
        out: Vec::new(),
    };
    let n = rng.gen_range(10..=60);
    let mut last: Option<DateTime<Utc>> = None;
    for _ in 0..n {
        let t = match last {
            Some(prev) if rng.gen_bool(0.2) => prev + Duration::seconds(rng.gen_range(0..7200)),
            _ => random_instant(rng),
        };
        last = Some(t);
        let lang = if rng.gen_bool(0.03) { "es" } else { "en" };
        let retweet = rng.gen_bool(0.08);
        let mut text = benign_text(rng, hostile, mild);
        if retweet {
            text = format!("RT @user{:04}: {text}", rng.gen_range(0..10_000));
        }
        b.push(t, text, lang, retweet);
    }
    b.out
}

/// Generates `n_focus` planted and `n_random` baseline profiles with ids
/// `user0000…` in shuffled order. Deterministic in `seed`.
pub fn synthesize(n_focus: usize, n_random: usize, seed: u64) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = Lexicon::bundled();
    let hostile = hostile_tokens(&lexicon);
    let mild = mild_tokens(&lexicon);
    let total = n_focus + n_random;
    let mut roles: Vec<bool> = (0..total).map(|i| i < n_focus).collect();
    roles.shuffle(&mut rng);

    let mut records = Vec::new();
    let mut planted = BTreeSet::new();
    for (i, is_focus) in roles.into_iter().enumerate() {
        let id = format!("user{i:04}");
        if is_focus {
            records.extend(focus_profile(&mut rng, &id, &hostile));
            planted.insert(id);
        } else {
            records.extend(random_profile(&mut rng, &id, &hostile, &mild));
        }
    }
    SynthCorpus {
        corpus: Corpus::from_records(records),
        planted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::{score_text_lexicon, Dimension};

    #[test]
    fn counts_and_determinism() {
        let a = synthesize(5, 50, 3);
        assert_eq!(a.corpus.n_profiles(), 55);
        assert_eq!(a.planted.len(), 5);
        let b = synthesize(5, 50, 3);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.corpus.write_jsonl(&mut x).unwrap();
        b.corpus.write_jsonl(&mut y).unwrap();
        assert_eq!(x, y);
        assert_ne!(synthesize(5, 50, 4).planted, a.planted);
        assert_eq!(synthesize(0, 0, 1).corpus.n_profiles(), 0);
    }

    #[test]
    fn planted_tweets_score_high() {
        let s = synthesize(2, 0, 11);
        let lex = Lexicon::bundled();
        for r in s.corpus.tweets() {
            let v = score_text_lexicon(&r.text, &lex);
            assert!(Dimension::ALL.iter().all(|d| v.get(*d) >= 0.7), "{}: {v:?}", r.text);
        }
    }

    #[test]
    fn planted_gaps_stay_in_their_bins() {
        let s = synthesize(1, 0, 5);
        let id = s.planted.iter().next().unwrap();
        let ts: Vec<_> = s.corpus.profile(id).unwrap().iter().map(|r| r.created_at).collect();
        let gaps = crate::temporal::inter_tweet_intervals(&ts);
        let long = gaps.iter().filter(|g| **g > 60.0).count();
        assert_eq!(long, 1);
        for g in gaps.iter().filter(|g| **g <= 60.0) {
            let bin = g.floor();
            assert!(FOCUS_GAPS.contains(&bin), "{g}");
        }
    }
}
