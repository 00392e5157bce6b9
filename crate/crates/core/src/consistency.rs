//! Per-profile consistency summaries and focus-profile selection.
//!
//! A profile is a focus profile for a dimension when its median score is at
//! least the median threshold and the Gini coefficient of its scores is at
//! most the Gini threshold (both bounds inclusive).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::scorer::{Dimension, ScoredCorpus};
use crate::{Error, Result};

pub const DEFAULT_MEDIAN_THRESHOLD: f64 = 0.4;
pub const DEFAULT_GINI_THRESHOLD: f64 = 0.25;
pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.4;
pub const DEFAULT_OBSCENE_FRACTION: f64 = 0.8;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Middle order statistic; mean of the two central values for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput { what: "median" });
    }
    let v = sorted(values);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Gini coefficient `ΣΣ|xi - xj| / (2 n² μ)`, evaluated through the sorted
/// form `Σ (2i - n - 1) x(i) / (n² μ)`. Zero when the mean is zero.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput { what: "gini" });
    }
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!("gini needs non-negative values, got {bad}")));
    }
    let v = sorted(values);
    let n = v.len() as f64;
    let total: f64 = v.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let weighted: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    // n² μ = n · total
    Ok((weighted / (n * total)).max(0.0))
}

/// Fraction of values at or above `threshold`.
pub fn binarized_proportion(values: &[f64], threshold: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput {
            what: "binarized_proportion",
        });
    }
    let hits = values.iter().filter(|v| **v >= threshold).count();
    Ok(hits as f64 / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionSummary {
    pub n_tweets: usize,
    pub median: f64,
    pub gini: f64,
    pub binarized_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub profile_id: String,
    pub dimensions: [DimensionSummary; 6],
}

impl ProfileSummary {
    pub fn get(&self, dim: Dimension) -> &DimensionSummary {
        &self.dimensions[dim.index()]
    }

    pub fn n_tweets(&self) -> usize {
        self.dimensions[0].n_tweets
    }
}

fn summarize_one(profile_id: &str, columns: &[Vec<f64>; 6], threshold: f64) -> Result<ProfileSummary> {
    let mut dims = [DimensionSummary {
        n_tweets: 0,
        median: 0.0,
        gini: 0.0,
        binarized_proportion: 0.0,
    }; 6];
    for (slot, col) in dims.iter_mut().zip(columns) {
        *slot = DimensionSummary {
            n_tweets: col.len(),
            median: median(col)?,
            gini: gini(col)?,
            binarized_proportion: binarized_proportion(col, threshold)?,
        };
    }
    Ok(ProfileSummary {
        profile_id: profile_id.to_string(),
        dimensions: dims,
    })
}

/// One summary per eligible profile, ordered by profile id. Profiles with no
/// scored tweets are returned separately.
pub fn summarize_profiles(
    scored: &ScoredCorpus<'_>,
    eligible: &BTreeSet<String>,
    threshold: f64,
) -> Result<(Vec<ProfileSummary>, Vec<String>)> {
    let columns: Vec<(&String, [Vec<f64>; 6])> = eligible
        .iter()
        .map(|id| {
            let mut cols: [Vec<f64>; 6] = Default::default();
            for (_, s) in scored.profile_scores(id) {
                for d in Dimension::ALL {
                    cols[d.index()].push(s.get(d));
                }
            }
            (id, cols)
        })
        .collect();
    let (empty, full): (Vec<_>, Vec<_>) = columns.into_iter().partition(|(_, c)| c[0].is_empty());

    #[cfg(feature = "parallel")]
    let summaries = {
        use rayon::prelude::*;
        full.par_iter()
            .map(|(id, cols)| summarize_one(id, cols, threshold))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let summaries = full
        .iter()
        .map(|(id, cols)| summarize_one(id, cols, threshold))
        .collect::<Result<Vec<_>>>()?;

    Ok((summaries, empty.into_iter().map(|(id, _)| id.clone()).collect()))
}

pub fn in_focus_box(s: &DimensionSummary, median_threshold: f64, gini_threshold: f64) -> bool {
    s.median >= median_threshold && s.gini <= gini_threshold
}

pub fn select_focus(
    summaries: &[ProfileSummary],
    dim: Dimension,
    median_threshold: f64,
    gini_threshold: f64,
) -> BTreeSet<String> {
    summaries
        .iter()
        .filter(|s| in_focus_box(s.get(dim), median_threshold, gini_threshold))
        .map(|s| s.profile_id.clone())
        .collect()
}

/// Uniform sample without replacement from `eligible \ exclude`.
pub fn sample_random_baseline(
    eligible: &BTreeSet<String>,
    exclude: &BTreeSet<String>,
    n: usize,
    seed: u64,
) -> Result<BTreeSet<String>> {
    let pool: Vec<&String> = eligible.difference(exclude).collect();
    if pool.len() < n {
        return Err(Error::InsufficientPool {
            needed: n,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, pool.len(), n)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect())
}

/// Pearson correlation; `None` when either series is constant or shorter than 2.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson needs paired series");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 6×6 correlation matrix over every scored tweet. Entries involving a
/// constant dimension are `None`; the diagonal is always 1.
pub fn pearson_matrix(scored: &ScoredCorpus<'_>) -> [[Option<f64>; 6]; 6] {
    let mut cols: [Vec<f64>; 6] = Default::default();
    for (_, s) in scored.scored_tweets() {
        for d in Dimension::ALL {
            cols[d.index()].push(s.get(d));
        }
    }
    let mut m = [[None; 6]; 6];
    for i in 0..6 {
        m[i][i] = Some(1.0);
        for j in (i + 1)..6 {
            let r = pearson(&cols[i], &cols[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Newline-separated lowercase hashtags; `#` comment lines are skipped and a
/// leading `#` on a tag is not expected.
pub fn load_obscene_lexicon<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut set = HashSet::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<obscene lexicon>", e))?;
        let tag = line.trim();
        if tag.is_empty() || tag.starts_with('#') {
            continue;
        }
        set.insert(tag.to_lowercase());
    }
    Ok(set)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ObsceneOutcome {
    pub retained: BTreeSet<String>,
    /// Removed profile → share of its hashtag occurrences found in the lexicon.
    pub removed: BTreeMap<String, f64>,
}

/// Drops profiles whose obscene share of hashtag occurrences is strictly
/// above `fraction_threshold`. Profiles without hashtags stay.
pub fn obscene_filter(
    focus: &BTreeSet<String>,
    corpus: &Corpus,
    lexicon: &HashSet<String>,
    fraction_threshold: f64,
) -> ObsceneOutcome {
    let mut out = ObsceneOutcome::default();
    for id in focus {
        let (total, obscene) = corpus
            .profile(id)
            .unwrap_or(&[])
            .iter()
            .flat_map(|r| &r.hashtags)
            .fold((0usize, 0usize), |(t, o), tag| {
                (t + 1, o + usize::from(lexicon.contains(tag)))
            });
        let fraction = if total == 0 { 0.0 } else { obscene as f64 / total as f64 };
        if total > 0 && fraction > fraction_threshold {
            out.removed.insert(id.clone(), fraction);
        } else {
            out.retained.insert(id.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionParams {
    pub median_threshold: f64,
    pub gini_threshold: f64,
    pub obscene_fraction: f64,
    pub min_tweets: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            median_threshold: DEFAULT_MEDIAN_THRESHOLD,
            gini_threshold: DEFAULT_GINI_THRESHOLD,
            obscene_fraction: DEFAULT_OBSCENE_FRACTION,
            min_tweets: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub dimension: Dimension,
    pub median_threshold: f64,
    pub gini_threshold: f64,
    pub focus: BTreeSet<String>,
    pub random_baseline: BTreeSet<String>,
    pub rng_seed: u64,
    pub removed_obscene: BTreeMap<String, f64>,
}

/// Focus selection, obscene-profile removal, then an equal-size random
/// baseline drawn from the remaining eligible profiles (every box member,
/// removed or not, is excluded from the baseline pool).
pub fn select(
    summaries: &[ProfileSummary],
    dim: Dimension,
    params: &SelectionParams,
    eligible: &BTreeSet<String>,
    corpus: &Corpus,
    obscene: &HashSet<String>,
    seed: u64,
) -> Result<SelectionResult> {
    for (name, t) in [
        ("median threshold", params.median_threshold),
        ("gini threshold", params.gini_threshold),
    ] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("{name} {t} outside [0,1]")));
        }
    }
    let qualified: Vec<ProfileSummary> = summaries
        .iter()
        .filter(|s| s.n_tweets() >= params.min_tweets)
        .cloned()
        .collect();
    let boxed = select_focus(&qualified, dim, params.median_threshold, params.gini_threshold);
    let filtered = obscene_filter(&boxed, corpus, obscene, params.obscene_fraction);
    let baseline = sample_random_baseline(eligible, &boxed, filtered.retained.len(), seed)?;
    Ok(SelectionResult {
        dimension: dim,
        median_threshold: params.median_threshold,
        gini_threshold: params.gini_threshold,
        focus: filtered.retained,
        random_baseline: baseline,
        rng_seed: seed,
        removed_obscene: filtered.removed,
    })
}
