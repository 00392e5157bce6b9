//! CSV rendering of tables and figure series.
//!
//! Every file starts with `# config_hash=<...> seed=<...> scorer=<...>`, then
//! a header row. Fields are comma separated with `\n` line endings and are
//! quoted only when they contain a comma. Counts are exact, ratios carry four
//! decimals, topic weights two, and distribution values six.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::compare::{EmpiricalDistribution, SimilarityProfile};
use crate::consistency::{in_focus_box, ProfileSummary, SelectionResult};
use crate::scorer::Dimension;
use crate::temporal::{IntervalPdf, TrendFit, YearMonth};
use crate::textstats::ReadabilityReport;
use crate::webcontent::{DiversityStats, HashtagRank};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub scorer: String,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!(
            "# config_hash={} seed={} scorer={}\n",
            self.config_hash, self.seed, self.scorer
        )
    }
}

pub fn count(n: usize) -> String {
    n.to_string()
}

pub fn ratio(x: f64) -> String {
    format!("{x:.4}")
}

pub fn weight(x: f64) -> String {
    format!("{x:.2}")
}

pub fn prob(x: f64) -> String {
    format!("{x:.6}")
}

/// Four significant digits; anything under `1e-15` prints as `<1e-15`.
pub fn p_value(p: f64) -> String {
    if p < 1e-15 {
        "<1e-15".into()
    } else {
        format!("{p:.4e}")
    }
}

fn field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One rendered CSV document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvDoc {
    pub name: String,
    text: String,
}

impl CsvDoc {
    pub fn new(name: impl Into<String>, prov: &Provenance, header: &[&str]) -> Self {
        let mut doc = CsvDoc {
            name: name.into(),
            text: prov.header(),
        };
        doc.row(header.iter().map(|h| h.to_string()));
        doc
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line: Vec<String> = fields.into_iter().map(|f| field(&f)).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn footnote(&mut self, note: &str) {
        let _ = writeln!(self.text, "# footnote: {note}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let path = dir.join(&self.name);
        std::fs::write(&path, &self.text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Focus,
    Random,
}

impl GroupKind {
    pub fn label(self) -> &'static str {
        match self {
            GroupKind::Focus => "focus",
            GroupKind::Random => "random",
        }
    }
}

/// Characterization of one profile group for one dimension. Optional fields
/// are `None` when their stage did not produce output for this group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub dimension: Dimension,
    pub kind: GroupKind,
    pub n_profiles: usize,
    pub diversity: Option<DiversityStats>,
    pub top_hashtags: Option<Vec<HashtagRank>>,
    pub categories: Option<Vec<(String, usize)>>,
    /// Top words per topic.
    pub topics: Option<Vec<Vec<(String, f64)>>>,
    pub readability: Option<ReadabilityReport>,
    pub interval_pdf: Option<IntervalPdf>,
    pub interval_cdf: Option<Vec<(f64, f64)>>,
    pub interval_quantiles: Option<IntervalQuantiles>,
    pub hour_pdf: Option<[f64; 24]>,
    pub weekday_pdf: Option<[f64; 7]>,
}

impl GroupReport {
    pub fn empty(dimension: Dimension, kind: GroupKind) -> Self {
        GroupReport {
            dimension,
            kind,
            n_profiles: 0,
            diversity: None,
            top_hashtags: None,
            categories: None,
            topics: None,
            readability: None,
            interval_pdf: None,
            interval_cdf: None,
            interval_quantiles: None,
            hour_pdf: None,
            weekday_pdf: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalQuantiles {
    pub n_intervals: usize,
    pub median: f64,
    pub p80: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub dimension: Dimension,
    pub selection: SelectionResult,
    pub focus: GroupReport,
    pub random: GroupReport,
    pub similarity_domains: Option<[SimilarityProfile; 3]>,
    pub similarity_hashtags: Option<[SimilarityProfile; 3]>,
}

impl DimensionReport {
    fn groups(&self) -> [&GroupReport; 2] {
        [&self.focus, &self.random]
    }
}

fn file(stage: &str, dim: Dimension) -> String {
    format!("{stage}_{}.csv", dim.name())
}

/// Value of a required field; an empty group reads as its default.
fn need<'a, T>(g: &'a GroupReport, v: &'a Option<T>, name: &'static str) -> Result<Option<&'a T>> {
    match v {
        Some(x) => Ok(Some(x)),
        None if g.n_profiles == 0 => Ok(None),
        None => Err(Error::MissingField(name)),
    }
}

fn empty_groups_note(doc: &mut CsvDoc, report: &DimensionReport) {
    for g in report.groups() {
        if g.n_profiles == 0 {
            doc.footnote(&format!("{} group is empty; its values are zero", g.kind.label()));
        }
    }
}

/// URL, domain, category and hashtag counts, one column per group.
pub fn diversity_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(
        file("diversity", report.dimension),
        prov,
        &["metric", "focus", "random"],
    );
    let f = &need(&report.focus, &report.focus.diversity, "diversity")?
        .cloned()
        .unwrap_or_default();
    let r = &need(&report.random, &report.random.diversity, "diversity")?
        .cloned()
        .unwrap_or_default();
    type Row = (&'static str, fn(&DiversityStats) -> String);
    let rows: [Row; 12] = [
        ("profiles", |s| count(s.n_profiles)),
        ("urls", |s| count(s.n_urls)),
        ("unique_urls", |s| count(s.n_unique_urls)),
        ("avg_unique_urls", |s| ratio(s.avg_unique_urls_per_sharing_profile)),
        ("domains", |s| count(s.n_domains)),
        ("unique_domains", |s| count(s.n_unique_domains)),
        ("avg_domains", |s| ratio(s.avg_domains_per_sharing_profile)),
        ("categories", |s| count(s.n_domain_categories)),
        ("category_coverage", |s| ratio(s.category_coverage)),
        ("hashtags", |s| count(s.n_hashtags)),
        ("unique_hashtags", |s| count(s.n_unique_hashtags)),
        ("avg_unique_hashtags", |s| {
            ratio(s.avg_unique_hashtags_per_sharing_profile)
        }),
    ];
    for (name, get) in rows {
        doc.row([name.to_string(), get(f), get(r)]);
    }
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

/// Most used hashtags with the share of the group's profiles using each.
pub fn hashtag_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(
        file("top_hashtags", report.dimension),
        prov,
        &["group", "rank", "hashtag", "occurrences", "profile_percent"],
    );
    for g in report.groups() {
        for (i, h) in need(g, &g.top_hashtags, "top_hashtags")?
            .into_iter()
            .flatten()
            .enumerate()
        {
            doc.row([
                g.kind.label().into(),
                count(i + 1),
                h.hashtag.clone(),
                count(h.occurrences),
                ratio(h.profile_percent),
            ]);
        }
    }
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

pub fn category_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(
        file("categories", report.dimension),
        prov,
        &["group", "rank", "category", "urls"],
    );
    for g in report.groups() {
        for (i, (c, n)) in need(g, &g.categories, "categories")?.into_iter().flatten().enumerate() {
            doc.row([g.kind.label().into(), count(i + 1), c.clone(), count(*n)]);
        }
    }
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

pub fn topic_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(
        file("topics", report.dimension),
        prov,
        &["group", "topic", "rank", "word", "weight"],
    );
    for g in report.groups() {
        for (t, words) in need(g, &g.topics, "topics")?.into_iter().flatten().enumerate() {
            for (i, (w, p)) in words.iter().enumerate() {
                doc.row([g.kind.label().into(), count(t), count(i + 1), w.clone(), weight(*p)]);
            }
        }
    }
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

pub fn readability_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(
        file("readability", report.dimension),
        prov,
        &["metric", "focus", "random"],
    );
    let f = need(&report.focus, &report.focus.readability, "readability")?
        .cloned()
        .unwrap_or_default();
    let r = need(&report.random, &report.random.readability, "readability")?
        .cloned()
        .unwrap_or_default();
    doc.row(["profiles".into(), count(f.n_profiles), count(r.n_profiles)]);
    doc.row(["avg_sentences".into(), ratio(f.avg_sentences), ratio(r.avg_sentences)]);
    doc.row(["avg_richness".into(), ratio(f.avg_richness), ratio(r.avg_richness)]);
    doc.row(["avg_flesch".into(), ratio(f.avg_flesch), ratio(r.avg_flesch)]);
    doc.row(["avg_ari".into(), ratio(f.avg_ari), ratio(r.avg_ari)]);
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

/// Interval counts, share under an hour, and the median and 80th-percentile gap.
pub fn temporal_table(report: &DimensionReport, prov: &Provenance) -> Result<CsvDoc> {
    let mut doc = CsvDoc::new(file("temporal", report.dimension), prov, &["metric", "focus", "random"]);
    let q = |g: &GroupReport| {
        g.interval_quantiles.unwrap_or(IntervalQuantiles {
            n_intervals: 0,
            median: 0.0,
            p80: 0.0,
        })
    };
    let within = |g: &GroupReport| g.interval_pdf.as_ref().map_or(0.0, |p| p.fraction_within_max);
    let (f, r) = (&report.focus, &report.random);
    doc.row(["intervals".into(), count(q(f).n_intervals), count(q(r).n_intervals)]);
    doc.row(["fraction_within_60_min".into(), ratio(within(f)), ratio(within(r))]);
    doc.row(["median_interval_min".into(), ratio(q(f).median), ratio(q(r).median)]);
    doc.row(["p80_interval_min".into(), ratio(q(f).p80), ratio(q(r).p80)]);
    for g in report.groups() {
        if g.n_profiles > 0 && g.interval_quantiles.is_none() {
            doc.footnote(&format!(
                "{} group has fewer than two tweets per profile",
                g.kind.label()
            ));
        }
    }
    empty_groups_note(&mut doc, report);
    Ok(doc)
}

pub fn render_tables(report: &DimensionReport, prov: &Provenance) -> Result<Vec<CsvDoc>> {
    Ok(vec![
        diversity_table(report, prov)?,
        hashtag_table(report, prov)?,
        category_table(report, prov)?,
        topic_table(report, prov)?,
        readability_table(report, prov)?,
        temporal_table(report, prov)?,
    ])
}

fn similarity_doc(name: String, profiles: &[SimilarityProfile; 3], prov: &Provenance) -> CsvDoc {
    let mut doc = CsvDoc::new(name, prov, &["pair", "x", "cdf"]);
    for p in profiles {
        if p.too_small {
            doc.footnote(&format!("{} has fewer than two profiles", p.kind.label()));
            continue;
        }
        for (x, c) in p.cdf() {
            doc.row([p.kind.label().into(), ratio(x), prob(c)]);
        }
    }
    doc
}

fn distribution_rows(doc: &mut CsvDoc, group: &str, d: &EmpiricalDistribution) {
    for (i, p) in d.probabilities.iter().enumerate() {
        doc.row([group.into(), ratio(d.edges[i]), ratio(d.edges[i + 1]), prob(*p)]);
    }
}

/// Similarity CDFs, interval PDF/CDF, and hour/weekday PDFs.
pub fn render_figure_data(report: &DimensionReport, prov: &Provenance) -> Result<Vec<CsvDoc>> {
    let dim = report.dimension;
    let mut out = Vec::new();
    for (stage, sim) in [
        ("similarity_domains", &report.similarity_domains),
        ("similarity_hashtags", &report.similarity_hashtags),
    ] {
        let sim = sim.as_ref().ok_or(Error::MissingField("similarity"))?;
        out.push(similarity_doc(file(stage, dim), sim, prov));
    }

    let mut pdf = CsvDoc::new(
        file("intervals_pdf", dim),
        prov,
        &["group", "bin_lo_min", "bin_hi_min", "probability"],
    );
    let mut cdf = CsvDoc::new(file("intervals_cdf", dim), prov, &["group", "x_min", "cdf"]);
    let mut hours = CsvDoc::new(file("hour_pdf", dim), prov, &["group", "hour", "probability"]);
    let mut days = CsvDoc::new(file("weekday_pdf", dim), prov, &["group", "weekday", "probability"]);
    for g in report.groups() {
        let label = g.kind.label();
        match g.interval_pdf.as_ref().and_then(|p| p.distribution.as_ref()) {
            Some(d) => distribution_rows(&mut pdf, label, d),
            None => pdf.footnote(&format!("{label} group has no interval of 60 minutes or less")),
        }
        match &g.interval_cdf {
            Some(points) => points
                .iter()
                .for_each(|(x, c)| cdf.row([label.into(), ratio(*x), prob(*c)])),
            None => cdf.footnote(&format!("{label} group has no intervals")),
        }
        match need(g, &g.hour_pdf, "hour_pdf")? {
            Some(h) => h
                .iter()
                .enumerate()
                .for_each(|(i, p)| hours.row([label.into(), count(i), prob(*p)])),
            None => hours.footnote(&format!("{label} group is empty")),
        }
        match need(g, &g.weekday_pdf, "weekday_pdf")? {
            Some(d) => d
                .iter()
                .enumerate()
                .for_each(|(i, p)| days.row([label.into(), count(i), prob(*p)])),
            None => days.footnote(&format!("{label} group is empty")),
        }
    }
    out.extend([pdf, cdf, hours, days]);
    Ok(out)
}

/// Per-profile statistics for one dimension, with the focus-box flag.
pub fn summary_table(
    summaries: &[ProfileSummary],
    dim: Dimension,
    median_threshold: f64,
    gini_threshold: f64,
    prov: &Provenance,
) -> CsvDoc {
    let mut doc = CsvDoc::new(
        file("summarize", dim),
        prov,
        &[
            "profile_id",
            "n_tweets",
            "median",
            "gini",
            "binarized_proportion",
            "in_box",
        ],
    );
    for s in summaries {
        let d = s.get(dim);
        doc.row([
            s.profile_id.clone(),
            count(d.n_tweets),
            ratio(d.median),
            ratio(d.gini),
            ratio(d.binarized_proportion),
            in_focus_box(d, median_threshold, gini_threshold).to_string(),
        ]);
    }
    doc
}

/// Gini against median, one point per profile.
pub fn scatter_figure(
    summaries: &[ProfileSummary],
    dim: Dimension,
    median_threshold: f64,
    gini_threshold: f64,
    prov: &Provenance,
) -> CsvDoc {
    let mut doc = CsvDoc::new(file("scatter", dim), prov, &["gini", "median", "in_box"]);
    for s in summaries {
        let d = s.get(dim);
        doc.row([
            prob(d.gini),
            prob(d.median),
            in_focus_box(d, median_threshold, gini_threshold).to_string(),
        ]);
    }
    doc
}

/// Focus, baseline and obscene-removed profiles of one selection.
pub fn selection_table(selection: &SelectionResult, summaries: &[ProfileSummary], prov: &Provenance) -> Result<CsvDoc> {
    let dim = selection.dimension;
    let mut doc = CsvDoc::new(
        file("select", dim),
        prov,
        &[
            "profile_id",
            "dimension",
            "n_tweets",
            "median",
            "gini",
            "binarized_proportion",
            "group",
        ],
    );
    let lookup = |id: &str| {
        summaries
            .binary_search_by(|s| s.profile_id.as_str().cmp(id))
            .map(|i| summaries[i].get(dim))
            .map_err(|_| Error::MissingField("profile summary"))
    };
    let groups = [
        ("focus", selection.focus.iter().collect::<Vec<_>>()),
        ("random", selection.random_baseline.iter().collect()),
        ("removed_obscene", selection.removed_obscene.keys().collect()),
    ];
    for (label, ids) in groups {
        for id in ids {
            let d = lookup(id)?;
            doc.row([
                id.clone(),
                dim.name().into(),
                count(d.n_tweets),
                ratio(d.median),
                ratio(d.gini),
                ratio(d.binarized_proportion),
                label.into(),
            ]);
        }
    }
    if selection.focus.is_empty() {
        doc.footnote("no profile passed the focus thresholds");
    }
    Ok(doc)
}

/// `dimension,coeff,r2,p_f`; dimensions whose fit failed are footnoted.
pub fn trend_table(fits: &[(Dimension, Option<TrendFit>)], prov: &Provenance) -> CsvDoc {
    let mut doc = CsvDoc::new("trend_all.csv", prov, &["dimension", "coeff", "r2", "p_f"]);
    for (d, fit) in fits {
        match fit {
            Some(f) => doc.row([
                d.name().into(),
                format!("{:.6}", f.slope),
                ratio(f.r2),
                p_value(f.p_value),
            ]),
            None => doc.footnote(&format!("{d}: fewer than three months with scored tweets")),
        }
    }
    if let Some((_, Some(f))) = fits.iter().find(|(_, f)| f.is_some()) {
        doc.footnote(&format!("x = {}", f.x_encoding));
    }
    doc
}

fn dimension_header(first: &str) -> Vec<&str> {
    std::iter::once(first)
        .chain(Dimension::ALL.iter().map(|d| d.name()))
        .collect()
}

/// CDF per dimension on a shared grid: `x` then six columns.
pub fn cdf_figure(name: &str, grid: &[f64], series: &[Vec<(f64, f64)>; 6], prov: &Provenance) -> CsvDoc {
    let mut doc = CsvDoc::new(name, prov, &dimension_header("x"));
    for (i, x) in grid.iter().enumerate() {
        doc.row(std::iter::once(ratio(*x)).chain(series.iter().map(|s| prob(s[i].1))));
    }
    doc
}

pub fn monthly_figure(series: &[Vec<(YearMonth, f64)>; 6], prov: &Provenance) -> CsvDoc {
    let mut doc = CsvDoc::new("monthly_median_all.csv", prov, &dimension_header("month"));
    let months: std::collections::BTreeSet<YearMonth> = series.iter().flatten().map(|(m, _)| *m).collect();
    for m in months {
        let values = series.iter().map(|s| {
            s.iter()
                .find(|(k, _)| *k == m)
                .map_or_else(String::new, |(_, v)| ratio(*v))
        });
        doc.row(std::iter::once(m.to_string()).chain(values));
    }
    doc
}

pub fn pearson_table(matrix: &[[Option<f64>; 6]; 6], prov: &Provenance) -> CsvDoc {
    let mut doc = CsvDoc::new("pearson_all.csv", prov, &dimension_header("dimension"));
    for d in Dimension::ALL {
        let cells = matrix[d.index()]
            .iter()
            .map(|c| c.map_or_else(|| "NA".to_string(), ratio));
        doc.row(std::iter::once(d.name().to_string()).chain(cells));
    }
    doc
}

/// Square matrix with group names along the header and first column.
pub fn kl_table(name: &str, groups: &[String], matrix: &[Vec<f64>], note: &str, prov: &Provenance) -> CsvDoc {
    let mut header = vec!["group"];
    header.extend(groups.iter().map(String::as_str));
    let mut doc = CsvDoc::new(name, prov, &header);
    for (g, row) in groups.iter().zip(matrix) {
        doc.row(std::iter::once(g.clone()).chain(row.iter().map(|v| ratio(*v))));
    }
    doc.footnote(note);
    doc
}
