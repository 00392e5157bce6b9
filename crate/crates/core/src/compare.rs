//! Homogeneity within and across profile groups: pairwise Jaccard
//! similarity of shared-item sets and KL divergence between binned
//! distributions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 101;
pub const DEFAULT_KL_EPSILON: f64 = 1e-10;
pub const CDF_GRID_POINTS: usize = 101;

/// `|a ∩ b| / |a ∪ b|`, and 0 when both sets are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    FocusFocus,
    RandomRandom,
    FocusRandom,
}

impl PairKind {
    pub fn label(self) -> &'static str {
        match self {
            PairKind::FocusFocus => "focus-focus",
            PairKind::RandomRandom => "random-random",
            PairKind::FocusRandom => "focus-random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityProfile {
    pub kind: PairKind,
    pub values: Vec<f64>,
    /// Set when a within-group pairing had fewer than two profiles.
    pub too_small: bool,
}

impl SimilarityProfile {
    /// `(x, P[value ≤ x])` on the 101-point grid over `[0, 1]`.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        empirical_cdf(&self.values, &unit_grid(CDF_GRID_POINTS))
    }
}

pub fn unit_grid(points: usize) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| i as f64 / last).collect()
}

/// Fraction of `values` at or below each grid point; all zeros for an empty
/// sample.
pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    grid.iter()
        .map(|&x| {
            let below = sorted.partition_point(|v| *v <= x);
            (x, if n == 0 { 0.0 } else { below as f64 / n as f64 })
        })
        .collect()
}

fn within<T: Ord>(sets: &[BTreeSet<T>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sets.len() * sets.len().saturating_sub(1) / 2);
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            out.push(jaccard(&sets[i], &sets[j]));
        }
    }
    out
}

/// Jaccard over all unordered pairs within `focus`, within `random`, and
/// across the two. Groups are visited in iteration order, so results are
/// deterministic for ordered inputs.
pub fn pairwise_similarity<'a, T: Ord>(
    focus: impl IntoIterator<Item = &'a String>,
    random: impl IntoIterator<Item = &'a String>,
    items: impl Fn(&str) -> BTreeSet<T>,
) -> [SimilarityProfile; 3] {
    let a: Vec<BTreeSet<T>> = focus.into_iter().map(|p| items(p)).collect();
    let b: Vec<BTreeSet<T>> = random.into_iter().map(|p| items(p)).collect();
    let cross = a.iter().flat_map(|x| b.iter().map(move |y| jaccard(x, y))).collect();
    [
        SimilarityProfile {
            kind: PairKind::FocusFocus,
            values: within(&a),
            too_small: a.len() < 2,
        },
        SimilarityProfile {
            kind: PairKind::RandomRandom,
            values: within(&b),
            too_small: b.len() < 2,
        },
        SimilarityProfile {
            kind: PairKind::FocusRandom,
            values: cross,
            too_small: false,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub edges: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn bins(&self) -> usize {
        self.probabilities.len()
    }

    /// `(left edge, probability)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.edges.iter().copied().zip(self.probabilities.iter().copied())
    }
}

pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| {
            if i == bins {
                hi
            } else {
                lo + (hi - lo) * i as f64 / bins as f64
            }
        })
        .collect()
}

/// Clamps into `[lo, hi]` and counts into `bins` equal-width bins; `hi`
/// itself lands in the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<EmpiricalDistribution> {
    if values.is_empty() {
        return Err(Error::EmptyInput { what: "histogram" });
    }
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("histogram range [{lo}, {hi}] with {bins} bins")));
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v.is_nan() {
            return Err(Error::invalid("histogram input contains NaN"));
        }
        let c = v.clamp(lo, hi);
        let idx = (((c - lo) * bins as f64 / (hi - lo)) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    Ok(EmpiricalDistribution {
        edges: uniform_edges(lo, hi, bins),
        probabilities: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// `Σ p' ln(p'/q')` in nats, where `p'`, `q'` are `p + ε`, `q + ε`
/// renormalized.
pub fn kl_divergence(p: &EmpiricalDistribution, q: &EmpiricalDistribution, epsilon: f64) -> Result<f64> {
    if p.edges != q.edges {
        return Err(Error::MismatchedBins);
    }
    let smooth = |d: &EmpiricalDistribution| {
        let total: f64 = d.probabilities.iter().map(|x| x + epsilon).sum();
        d.probabilities
            .iter()
            .map(|x| (x + epsilon) / total)
            .collect::<Vec<_>>()
    };
    let (ps, qs) = (smooth(p), smooth(q));
    let d: f64 = ps
        .iter()
        .zip(&qs)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum();
    Ok(d.max(0.0))
}

/// `m[i][j] = D(hist(group i) ‖ hist(group j))` over a shared binning.
pub fn kl_matrix(groups: &[(String, Vec<f64>)], lo: f64, hi: f64, bins: usize) -> Result<Vec<Vec<f64>>> {
    if groups.len() < 2 {
        return Err(Error::invalid("kl_matrix needs at least two groups"));
    }
    let hists = groups
        .iter()
        .map(|(name, v)| {
            if v.is_empty() {
                Err(Error::invalid(format!("group {name:?} is empty")))
            } else {
                histogram(v, lo, hi, bins)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    hists
        .iter()
        .map(|p| hists.iter().map(|q| kl_divergence(p, q, DEFAULT_KL_EPSILON)).collect())
        .collect()
}
