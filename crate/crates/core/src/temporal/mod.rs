//! Posting rhythm (inter-tweet intervals, hour-of-day and weekday
//! distributions) and the monthly median-score trend.

pub mod special;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Datelike, Timelike, Utc};
use serde::Serialize;

use crate::compare::{histogram, EmpiricalDistribution};
use crate::consistency::median;
use crate::corpus::{Corpus, TweetRecord};
use crate::scorer::{Dimension, ScoredCorpus};
use crate::{Error, Result};

pub const INTERVAL_PDF_MAX_MINUTES: f64 = 60.0;
pub const INTERVAL_PDF_BIN_MINUTES: f64 = 1.0;

/// Successive gaps in minutes. Fewer than two timestamps give no gaps.
pub fn inter_tweet_intervals(timestamps: &[DateTime<Utc>]) -> Vec<f64> {
    let mut ts = timestamps.to_vec();
    ts.sort();
    ts.windows(2)
        .map(|w| (w[1] - w[0]).num_seconds() as f64 / 60.0)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntervalSeries {
    pub per_profile: BTreeMap<String, Vec<f64>>,
    /// All profiles' gaps concatenated in profile-id order.
    pub pooled: Vec<f64>,
}

pub fn interval_series(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    admit: impl Fn(&TweetRecord) -> bool,
) -> IntervalSeries {
    let mut out = IntervalSeries::default();
    for id in group {
        let ts: Vec<_> = corpus
            .profile(id)
            .unwrap_or(&[])
            .iter()
            .filter(|r| admit(r))
            .map(|r| r.created_at)
            .collect();
        let gaps = inter_tweet_intervals(&ts);
        out.pooled.extend_from_slice(&gaps);
        out.per_profile.insert(id.clone(), gaps);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalPdf {
    /// Over `[0, max]`; `None` when no gap is that short.
    pub distribution: Option<EmpiricalDistribution>,
    pub fraction_within_max: f64,
}

/// Distribution of the gaps no longer than `max_minutes`, in bins of
/// `bin_minutes`, plus the share of all gaps that short.
pub fn interval_pdf(pooled: &[f64], bin_minutes: f64, max_minutes: f64) -> Result<IntervalPdf> {
    if pooled.is_empty() {
        return Err(Error::EmptyInput { what: "interval_pdf" });
    }
    if !(bin_minutes > 0.0 && max_minutes > 0.0) {
        return Err(Error::invalid("interval_pdf needs positive bin width and max"));
    }
    let short: Vec<f64> = pooled.iter().copied().filter(|g| *g <= max_minutes).collect();
    let bins = (max_minutes / bin_minutes).ceil() as usize;
    let distribution = if short.is_empty() {
        None
    } else {
        Some(histogram(&short, 0.0, bins as f64 * bin_minutes, bins)?)
    };
    Ok(IntervalPdf {
        distribution,
        fraction_within_max: short.len() as f64 / pooled.len() as f64,
    })
}

/// Empirical CDF of a gap sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCdf {
    sorted: Vec<f64>,
}

pub fn interval_cdf(pooled: &[f64]) -> Result<IntervalCdf> {
    if pooled.is_empty() {
        return Err(Error::EmptyInput { what: "interval_cdf" });
    }
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(IntervalCdf { sorted })
}

impl IntervalCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample value whose CDF reaches `q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("quantile {q} outside [0,1]")));
        }
        let n = self.sorted.len();
        let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
        Ok(self.sorted[rank.min(n) - 1])
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().expect("non-empty by construction")
    }

    /// `(x, cdf)` at `points` evenly spaced values over `[0, max]`.
    pub fn grid(&self, points: usize) -> Vec<(f64, f64)> {
        let points = points.max(2);
        let hi = self.max().max(0.0);
        (0..points)
            .map(|i| {
                let x = hi * i as f64 / (points - 1) as f64;
                (x, self.cdf(x))
            })
            .collect()
    }
}

fn group_times<'a>(
    group: &'a BTreeSet<String>,
    corpus: &'a Corpus,
    admit: &'a dyn Fn(&TweetRecord) -> bool,
) -> impl Iterator<Item = DateTime<Utc>> + 'a {
    group
        .iter()
        .flat_map(move |id| corpus.profile(id).unwrap_or(&[]))
        .filter(move |r| admit(r))
        .map(|r| r.created_at)
}

fn normalized<const N: usize>(counts: [usize; N], what: &'static str) -> Result<[f64; N]> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput { what });
    }
    Ok(counts.map(|c| c as f64 / total as f64))
}

/// Share of the group's tweets per UTC hour.
pub fn hour_of_day_pdf(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    admit: &dyn Fn(&TweetRecord) -> bool,
) -> Result<[f64; 24]> {
    let mut counts = [0usize; 24];
    for t in group_times(group, corpus, admit) {
        counts[t.hour() as usize] += 1;
    }
    normalized(counts, "hour_of_day_pdf")
}

/// Share of the group's tweets per weekday, Monday = 0.
pub fn day_of_week_pdf(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    admit: &dyn Fn(&TweetRecord) -> bool,
) -> Result<[f64; 7]> {
    let mut counts = [0usize; 7];
    for t in group_times(group, corpus, admit) {
        counts[t.weekday().num_days_from_monday() as usize] += 1;
    }
    normalized(counts, "day_of_week_pdf")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Median score per calendar month (UTC) over every scored tweet; months
/// without tweets are absent.
pub fn monthly_median_series(scored: &ScoredCorpus<'_>, dim: Dimension) -> Vec<(YearMonth, f64)> {
    let mut months = BTreeMap::<YearMonth, Vec<f64>>::new();
    for (r, s) in scored.scored_tweets() {
        let key = YearMonth {
            year: r.created_at.year(),
            month: r.created_at.month(),
        };
        months.entry(key).or_default().push(s.get(dim));
    }
    months
        .into_iter()
        .map(|(m, v)| (m, median(&v).expect("month bucket is non-empty")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub f_stat: f64,
    pub p_value: f64,
    pub n: usize,
    pub slope_stderr: f64,
    /// How x was encoded for the fit.
    pub x_encoding: String,
}

/// Simple least squares `y = intercept + slope·x` with the F test of the
/// slope against F(1, n − 2).
pub fn ols_trend(points: &[(f64, f64)]) -> Result<TrendFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::invalid(format!("ols_trend needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("ols_trend needs at least two distinct x values"));
    }
    let df = nf - 2.0;
    if syy == 0.0 {
        return Ok(TrendFit {
            slope: 0.0,
            intercept: my,
            r2: 0.0,
            f_stat: 0.0,
            p_value: 1.0,
            n,
            slope_stderr: 0.0,
            x_encoding: String::new(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r2 = (1.0 - sse / syy).clamp(0.0, 1.0);
    let f_stat = if r2 >= 1.0 { f64::INFINITY } else { r2 / (1.0 - r2) * df };
    Ok(TrendFit {
        slope,
        intercept,
        r2,
        f_stat,
        p_value: special::f_upper_tail(f_stat, 1.0, df),
        n,
        slope_stderr: (sse / df / sxx).sqrt(),
        x_encoding: String::new(),
    })
}

/// Fits the monthly medians against month position `0..M-1`.
pub fn monthly_trend(series: &[(YearMonth, f64)]) -> Result<TrendFit> {
    let points: Vec<(f64, f64)> = series.iter().enumerate().map(|(i, (_, y))| (i as f64, *y)).collect();
    let mut fit = ols_trend(&points)?;
    fit.x_encoding = "month index 0..M-1 over months present".into();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::parse_instant;
    use crate::scorer::ScoreVector;

    fn t(s: &str) -> DateTime<Utc> {
        parse_instant(s).unwrap()
    }

    fn rec(i: usize, profile: &str, ts: DateTime<Utc>) -> TweetRecord {
        TweetRecord {
            tweet_id: format!("{profile}{i}"),
            profile_id: profile.into(),
            created_at: ts,
            text: String::new(),
            lang: "en".into(),
            is_retweet: false,
            hashtags: vec![],
            urls: vec![],
        }
    }

    #[test]
    fn interval_examples() {
        let base = t("2020-01-01T00:00:00Z");
        let five = chrono::Duration::minutes(5);
        assert_eq!(inter_tweet_intervals(&[base, base + five, base + five * 2]), [5.0, 5.0]);
        assert_eq!(inter_tweet_intervals(&[base, base]), [0.0]);
        assert!(inter_tweet_intervals(&[base]).is_empty());
        assert_eq!(
            inter_tweet_intervals(&[base + chrono::Duration::seconds(90), base]),
            [1.5]
        );
    }

    #[test]
    fn pdf_examples() {
        let pdf = interval_pdf(&[5.0; 10], 1.0, 60.0).unwrap();
        let d = pdf.distribution.unwrap();
        assert_eq!(d.bins(), 60);
        assert_eq!(d.probabilities[5], 1.0);
        assert_eq!(pdf.fraction_within_max, 1.0);

        let pdf = interval_pdf(&[3.0, 100.0, 7.0, 500.0], 1.0, 60.0).unwrap();
        assert_eq!(pdf.fraction_within_max, 0.5);
        let pdf = interval_pdf(&[100.0], 1.0, 60.0).unwrap();
        assert!(pdf.distribution.is_none());
        assert!(interval_pdf(&[], 1.0, 60.0).is_err());
        // exactly 60 lands in the last bin
        let d = interval_pdf(&[60.0], 1.0, 60.0).unwrap().distribution.unwrap();
        assert_eq!(d.probabilities[59], 1.0);
    }

    #[test]
    fn cdf_quantiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let c = interval_cdf(&v).unwrap();
        assert_eq!(c.quantile(0.8).unwrap(), 8.0);
        assert_eq!(c.quantile(1.0).unwrap(), 10.0);
        assert_eq!(c.quantile(0.0).unwrap(), 1.0);
        assert_eq!(c.quantile(0.05).unwrap(), 1.0);
        assert!(c.quantile(1.5).is_err());
        let c = interval_cdf(&[4.0; 5]).unwrap();
        assert_eq!(c.cdf(3.999), 0.0);
        assert_eq!(c.cdf(4.0), 1.0);
        assert!(interval_cdf(&[]).is_err());
    }

    #[test]
    fn hour_and_weekday() {
        let all = |_: &TweetRecord| true;
        // 2020-01-05 is a Sunday
        let corpus = Corpus::from_records(
            (0..6).map(|i| rec(i, "p", t("2020-01-05T13:00:00Z") + chrono::Duration::weeks(i as i64))),
        );
        let g: BTreeSet<String> = ["p".to_string()].into();
        let h = hour_of_day_pdf(&g, &corpus, &all).unwrap();
        assert_eq!(h[13], 1.0);
        let d = day_of_week_pdf(&g, &corpus, &all).unwrap();
        assert_eq!(d[6], 1.0);

        let corpus = Corpus::from_records(
            (0..14).map(|i| rec(i, "p", t("2020-01-06T08:00:00Z") + chrono::Duration::days(i as i64))),
        );
        let d = day_of_week_pdf(&g, &corpus, &all).unwrap();
        assert!(d.iter().all(|p| (p - 1.0 / 7.0).abs() < 1e-12));
        assert!(hour_of_day_pdf(&BTreeSet::new(), &corpus, &all).is_err());
    }

    #[test]
    fn monthly_medians() {
        let corpus = Corpus::from_records([
            rec(0, "p", t("2020-01-03T00:00:00Z")),
            rec(1, "p", t("2020-01-20T00:00:00Z")),
            rec(2, "q", t("2020-03-01T00:00:00Z")),
        ]);
        let vals = [0.2, 0.4, 0.6];
        let scores = corpus
            .tweets()
            .map(|r| {
                let i: usize = r.tweet_id[1..].parse().unwrap();
                (r.tweet_id.clone(), ScoreVector::clamped([vals[i]; 6]).0)
            })
            .collect();
        let scored = ScoredCorpus {
            corpus: &corpus,
            scores,
            scorer_id: "t".into(),
        };
        let series = monthly_median_series(&scored, Dimension::Threat);
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].0.to_string(), "2020-01");
        assert!((series[0].1 - 0.3).abs() < 1e-12);
        assert_eq!(series[1], (YearMonth { year: 2020, month: 3 }, 0.6));
    }

    #[test]
    fn ols_exact_and_constant() {
        let line: Vec<_> = (0..10).map(|x| (x as f64, 2.0 * x as f64 + 1.0)).collect();
        let fit = ols_trend(&line).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);
        assert!(fit.p_value < 1e-15);

        let flat: Vec<_> = (0..10).map(|x| (x as f64, 0.3)).collect();
        let fit = ols_trend(&flat).unwrap();
        assert_eq!((fit.slope, fit.r2, fit.p_value), (0.0, 0.0, 1.0));

        assert!(ols_trend(&line[..2]).is_err());
        assert!(ols_trend(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn ols_matches_normal_equations() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| (i as f64, (i as f64 * 0.7).sin() + 0.05 * i as f64))
            .collect();
        // (XᵀX) β = Xᵀy with X = [1 x], solved by Cramer's rule
        let (n, sx, sxx) = (
            pts.len() as f64,
            pts.iter().map(|p| p.0).sum::<f64>(),
            pts.iter().map(|p| p.0 * p.0).sum::<f64>(),
        );
        let (sy, sxy) = (
            pts.iter().map(|p| p.1).sum::<f64>(),
            pts.iter().map(|p| p.0 * p.1).sum::<f64>(),
        );
        let det = n * sxx - sx * sx;
        let b0 = (sy * sxx - sx * sxy) / det;
        let b1 = (n * sxy - sx * sy) / det;
        let fit = ols_trend(&pts).unwrap();
        assert!((fit.slope - b1).abs() < 1e-12 && (fit.intercept - b0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn ols_translation_equivariant(ys in proptest::collection::vec(-5.0f64..5.0, 3..30), c in -10.0f64..10.0) {
            let pts: Vec<_> = ys.iter().enumerate().map(|(i, y)| (i as f64, *y)).collect();
            let shifted: Vec<_> = pts.iter().map(|(x, y)| (*x, y + c)).collect();
            let (a, b) = (ols_trend(&pts).unwrap(), ols_trend(&shifted).unwrap());
            prop_assume!(a.r2 > 1e-9 && a.r2 < 1.0 - 1e-9);
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
            prop_assert!((b.intercept - a.intercept - c).abs() < 1e-9);
            prop_assert!((a.r2 - b.r2).abs() < 1e-9);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
            prop_assert!((a.f_stat - b.f_stat).abs() < 1e-9 * a.f_stat.max(1.0));
        }

        #[test]
        fn hour_pdf_invariant_to_day_shift(offsets in proptest::collection::vec(0i64..1_000_000, 1..40)) {
            let base = t("2020-01-01T00:00:00Z");
            let all = |_: &TweetRecord| true;
            let g: BTreeSet<String> = ["p".to_string()].into();
            let a = Corpus::from_records(offsets.iter().enumerate().map(|(i, o)| rec(i, "p", base + chrono::Duration::seconds(*o))));
            let b = Corpus::from_records(offsets.iter().enumerate().map(|(i, o)| rec(i, "p", base + chrono::Duration::seconds(*o) + chrono::Duration::hours(24))));
            let (ha, hb) = (hour_of_day_pdf(&g, &a, &all).unwrap(), hour_of_day_pdf(&g, &b, &all).unwrap());
            prop_assert_eq!(ha, hb);
            prop_assert!((ha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn incomplete_beta_reflection(a in 0.1f64..20.0, b in 0.1f64..20.0, x in 0.0f64..1.0) {
            let s = special::regularized_incomplete_beta(a, b, x) + special::regularized_incomplete_beta(b, a, 1.0 - x);
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }
}
