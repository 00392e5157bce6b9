//! Stage orchestration: ingest → score → summarize → select → characterize,
//! compare, temporal. Each stage can be run alone; its prerequisites are
//! recomputed in memory (cheaply, thanks to the score cache) and only the
//! requested stages write files. `manifest.json` lists every file with its
//! SHA-256, the sub-seeds drawn and the scorer used.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compare::{empirical_cdf, kl_matrix, pairwise_similarity, unit_grid, CDF_GRID_POINTS};
use crate::config::PipelineConfig;
use crate::consistency::{pearson_matrix, select, summarize_profiles, ProfileSummary, SelectionResult};
use crate::corpus::{filter_eligible_profiles, Corpus, IngestionLog, Ingestor, TweetRecord};
use crate::report::{self, CsvDoc, DimensionReport, GroupKind, GroupReport, IntervalQuantiles, Provenance};
use crate::scorer::{score_corpus, Dimension, ScoreLog, ScoredCorpus, Scorer};
use crate::seed;
use crate::temporal::{
    day_of_week_pdf, hour_of_day_pdf, interval_cdf, interval_pdf, interval_series, monthly_median_series,
    monthly_trend, IntervalSeries, INTERVAL_PDF_BIN_MINUTES, INTERVAL_PDF_MAX_MINUTES,
};
use crate::textstats::{group_readability, lda_fit, normalize, readability, top_words};
use crate::webcontent::{
    category_histogram, diversity_stats, profile_domains, profile_hashtags, top_hashtags, CategoryMap, SuffixRuleSet,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Score,
    Summarize,
    Select,
    Characterize,
    Compare,
    Temporal,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Score,
        Stage::Summarize,
        Stage::Select,
        Stage::Characterize,
        Stage::Compare,
        Stage::Temporal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Score => "score",
            Stage::Summarize => "summarize",
            Stage::Select => "select",
            Stage::Characterize => "characterize",
            Stage::Compare => "compare",
            Stage::Temporal => "temporal",
        }
    }

    /// Ingest..Select are linear; the three characterization stages each
    /// need only Select.
    fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Score => &[Stage::Ingest],
            Stage::Summarize => &[Stage::Ingest, Stage::Score],
            _ => &[Stage::Ingest, Stage::Score, Stage::Summarize, Stage::Select],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    /// `ok`, `failed` or `not_run`.
    pub status: String,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub scorer: String,
    pub dimensions: Vec<String>,
    pub config: serde_json::Value,
    pub sub_seeds: BTreeMap<String, u64>,
    pub stages: Vec<StageRecord>,
    /// File name → SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
    /// False when a stage failed and later stages did not run.
    pub complete: bool,
}

impl Manifest {
    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

/// Everything a run computed, for callers that want more than the files.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub manifest: Option<Manifest>,
    pub ingestion: IngestionLog,
    pub score_log: ScoreLog,
    pub summaries: Vec<ProfileSummary>,
    pub selections: Vec<SelectionResult>,
    pub reports: Vec<DimensionReport>,
}

struct Artifacts {
    wanted: BTreeSet<Stage>,
    files: Vec<(Stage, String, Vec<u8>)>,
    notes: BTreeMap<Stage, Vec<String>>,
}

impl Artifacts {
    fn add(&mut self, stage: Stage, name: impl Into<String>, bytes: Vec<u8>) {
        if self.wanted.contains(&stage) {
            self.files.push((stage, name.into(), bytes));
        }
    }

    fn csv(&mut self, stage: Stage, doc: CsvDoc) {
        let name = doc.name.clone();
        self.add(stage, name, doc.as_str().as_bytes().to_vec());
    }

    fn json<T: Serialize>(&mut self, stage: Stage, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(stage, name, bytes);
        Ok(())
    }

    fn note(&mut self, stage: Stage, note: String) {
        self.notes.entry(stage).or_default().push(note);
    }
}

#[derive(Serialize)]
struct IngestReport<'a> {
    sources: Vec<String>,
    profiles: usize,
    tweets: usize,
    admitted_tweets: usize,
    log: &'a IngestionLog,
}

/// Per-run numbers only; nothing that depends on cache warmth, so reruns
/// stay byte-identical.
#[derive(Serialize)]
struct ScoreReport<'a> {
    scorer: &'a str,
    scored: usize,
    failures: &'a [(String, String)],
    clamped: &'a [String],
}

struct Inputs {
    rules: SuffixRuleSet,
    categories: CategoryMap,
    stopwords: HashSet<String>,
    obscene: HashSet<String>,
}

pub struct Pipeline<'s> {
    pub config: PipelineConfig,
    scorer: &'s dyn Scorer,
}

impl<'s> Pipeline<'s> {
    pub fn new(config: PipelineConfig, scorer: &'s dyn Scorer) -> Self {
        Pipeline { config, scorer }
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            config_hash: self.config.hash(),
            seed: self.config.seed,
            scorer: self.scorer.id(),
        }
    }

    pub fn run_all(&self) -> Result<RunOutcome> {
        self.run(&Stage::ALL)
    }

    /// Runs `stages` plus whatever they depend on, writing only the files
    /// of `stages` and the manifest. Config errors surface before any work.
    pub fn run(&self, stages: &[Stage]) -> Result<RunOutcome> {
        self.config.validate()?;
        let wanted: BTreeSet<Stage> = stages.iter().copied().collect();
        let mut needed = wanted.clone();
        for s in &wanted {
            needed.extend(s.requires());
        }
        let out_dir = self.config.output_dir.clone();
        std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

        let mut art = Artifacts {
            wanted,
            files: Vec::new(),
            notes: BTreeMap::new(),
        };
        let mut outcome = RunOutcome::default();
        let mut sub_seeds = BTreeMap::new();
        let result = self.execute(&needed, &mut art, &mut outcome, &mut sub_seeds);
        let failed = result.as_ref().err().and_then(|e| match e {
            Error::Stage { stage, .. } => Stage::ALL.into_iter().find(|s| s.name() == stage),
            _ => None,
        });
        if let Err(e) = &result {
            if let Some(stage) = failed {
                art.note(stage, e.to_string());
            }
        }
        let manifest = self.write(&art, sub_seeds, failed, &out_dir)?;
        outcome.manifest = Some(manifest);
        result.map(|_| outcome)
    }

    fn execute(
        &self,
        needed: &BTreeSet<Stage>,
        art: &mut Artifacts,
        out: &mut RunOutcome,
        sub_seeds: &mut BTreeMap<String, u64>,
    ) -> Result<()> {
        let cfg = &self.config;
        let prov = self.provenance();
        let stage = |s: Stage| move |e: Error| e.in_stage(s.name());

        let corpus = self.ingest(art, &mut out.ingestion).map_err(stage(Stage::Ingest))?;
        if !needed.contains(&Stage::Score) {
            return Ok(());
        }
        let inputs = self.load_inputs().map_err(stage(Stage::Ingest))?;

        let scored = self
            .score(&corpus, art, &prov, &mut out.score_log)
            .map_err(stage(Stage::Score))?;
        if !needed.contains(&Stage::Summarize) {
            return Ok(());
        }

        let eligible = filter_eligible_profiles(&corpus, &cfg.eligibility());
        out.summaries = self
            .summarize(&scored, &eligible, art, &prov)
            .map_err(stage(Stage::Summarize))?;
        if !needed.contains(&Stage::Select) {
            return Ok(());
        }

        for &dim in &cfg.dimensions {
            let s = seed::selection(cfg.seed, dim.name());
            sub_seeds.insert(format!("selection/{dim}"), s);
            let sel = select(
                &out.summaries,
                dim,
                &cfg.selection_params(),
                &eligible,
                &corpus,
                &inputs.obscene,
                s,
            )
            .and_then(|sel| {
                art.csv(Stage::Select, report::selection_table(&sel, &out.summaries, &prov)?);
                Ok(sel)
            })
            .map_err(stage(Stage::Select))?;
            if sel.focus.is_empty() {
                for st in [Stage::Select, Stage::Characterize, Stage::Compare, Stage::Temporal] {
                    art.note(st, format!("{dim}: focus set is empty, characterization skipped"));
                }
            }
            out.selections.push(sel);
        }

        for sel in &out.selections {
            let dim = sel.dimension;
            let mut r = DimensionReport {
                dimension: dim,
                selection: sel.clone(),
                focus: GroupReport::empty(dim, GroupKind::Focus),
                random: GroupReport::empty(dim, GroupKind::Random),
                similarity_domains: None,
                similarity_hashtags: None,
            };
            if sel.focus.is_empty() {
                out.reports.push(r);
                continue;
            }
            r.focus.n_profiles = sel.focus.len();
            r.random.n_profiles = sel.random_baseline.len();
            if needed.contains(&Stage::Characterize) {
                self.characterize(&mut r, &corpus, &inputs, art, sub_seeds)
                    .map_err(stage(Stage::Characterize))?;
                for doc in [
                    report::diversity_table(&r, &prov),
                    report::hashtag_table(&r, &prov),
                    report::category_table(&r, &prov),
                    report::topic_table(&r, &prov),
                    report::readability_table(&r, &prov),
                ] {
                    art.csv(Stage::Characterize, doc.map_err(stage(Stage::Characterize))?);
                }
            }
            if needed.contains(&Stage::Compare) {
                r.similarity_domains = Some(pairwise_similarity(&sel.focus, &sel.random_baseline, |p| {
                    profile_domains(p, &corpus, &inputs.rules)
                }));
                r.similarity_hashtags = Some(pairwise_similarity(&sel.focus, &sel.random_baseline, |p| {
                    profile_hashtags(p, &corpus)
                }));
            }
            if needed.contains(&Stage::Temporal) {
                for g in [&mut r.focus, &mut r.random] {
                    let ids = match g.kind {
                        GroupKind::Focus => &sel.focus,
                        GroupKind::Random => &sel.random_baseline,
                    };
                    temporal_group(g, ids, &corpus).map_err(stage(Stage::Temporal))?;
                }
                art.csv(
                    Stage::Temporal,
                    report::temporal_table(&r, &prov).map_err(stage(Stage::Temporal))?,
                );
            }
            if needed.contains(&Stage::Compare) || needed.contains(&Stage::Temporal) {
                let figures = report::render_figure_data(&r, &prov);
                // Similarity figures are compare output, the rest temporal.
                match figures {
                    Ok(docs) => {
                        for doc in docs {
                            let st = if doc.name.starts_with("similarity_") {
                                Stage::Compare
                            } else {
                                Stage::Temporal
                            };
                            art.csv(st, doc);
                        }
                    }
                    Err(Error::MissingField(_)) => {
                        // only one of the two stages ran; render what it produced
                        self.partial_figures(&r, &prov, art);
                    }
                    Err(e) => return Err(e.in_stage(Stage::Compare.name())),
                }
            }
            out.reports.push(r);
        }

        if needed.contains(&Stage::Compare) {
            self.kl_compare(&out.reports, &corpus, &inputs, art, &prov)
                .map_err(stage(Stage::Compare))?;
        }
        if needed.contains(&Stage::Temporal) {
            self.kl_intervals(&out.reports, art, &prov)
                .map_err(stage(Stage::Temporal))?;
            self.trend(&scored, art, &prov);
        }
        Ok(())
    }

    fn partial_figures(&self, r: &DimensionReport, prov: &Provenance, art: &mut Artifacts) {
        let mut copy = r.clone();
        let empty = pairwise_similarity(&[], &[], |_| BTreeSet::<String>::new());
        let have_sim = copy.similarity_domains.is_some();
        if !have_sim {
            copy.similarity_domains = Some(empty.clone());
            copy.similarity_hashtags = Some(empty);
        }
        if let Ok(docs) = report::render_figure_data(&copy, prov) {
            for doc in docs {
                let sim = doc.name.starts_with("similarity_");
                if sim && have_sim {
                    art.csv(Stage::Compare, doc);
                } else if !sim && !have_sim {
                    art.csv(Stage::Temporal, doc);
                }
            }
        }
    }

    fn ingest(&self, art: &mut Artifacts, log_out: &mut IngestionLog) -> Result<Corpus> {
        let cfg = &self.config;
        let mut ingestor = Ingestor::new(cfg.strict);
        for (given, path) in cfg.inputs.corpus.iter().zip(cfg.corpus_paths()) {
            let f = File::open(&path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::MissingFile(path.clone()),
                _ => Error::io(&path, e),
            })?;
            ingestor.ingest(BufReader::new(f), &given.display().to_string())?;
        }
        let (full, log) = ingestor.finish();
        let rule = cfg.eligibility();
        let admitted = Corpus::from_records(full.tweets().filter(|r| rule.admits(r)).cloned());
        let eligible = filter_eligible_profiles(&admitted, &rule);

        art.json(
            Stage::Ingest,
            "ingest_report.json",
            &IngestReport {
                sources: full.provenance.sources.clone(),
                profiles: full.n_profiles(),
                tweets: full.n_tweets(),
                admitted_tweets: admitted.n_tweets(),
                log: &log,
            },
        )?;
        let prov = self.provenance();
        let mut index = CsvDoc::new(
            "corpus_index.csv",
            &prov,
            &[
                "profile_id",
                "n_tweets",
                "n_admitted",
                "first_tweet",
                "last_tweet",
                "eligible",
            ],
        );
        for (id, records) in full.profiles() {
            let admitted_n = admitted.profile(id).map_or(0, <[TweetRecord]>::len);
            index.row([
                id.to_string(),
                records.len().to_string(),
                admitted_n.to_string(),
                crate::corpus::format_instant(&records[0].created_at),
                crate::corpus::format_instant(&records[records.len() - 1].created_at),
                eligible.contains(id).to_string(),
            ]);
        }
        art.csv(Stage::Ingest, index);
        *log_out = log;
        Ok(admitted)
    }

    fn load_inputs(&self) -> Result<Inputs> {
        Ok(Inputs {
            rules: self.config.load_suffix_rules()?,
            categories: self.config.load_categories()?,
            stopwords: self.config.load_stopwords()?,
            obscene: self.config.load_obscene()?,
        })
    }

    fn score<'c>(
        &self,
        corpus: &'c Corpus,
        art: &mut Artifacts,
        prov: &Provenance,
        log_out: &mut ScoreLog,
    ) -> Result<ScoredCorpus<'c>> {
        let id = self.scorer.id();
        let mut cache = self.config.load_cache(&id)?;
        let before = cache.len();
        let (scored, log) = score_corpus(corpus, self.scorer, &mut cache, |_| true);
        if cache.len() != before || cache.stale_entries() > 0 {
            let path = self.config.score_cache_path();
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let mut buf = Vec::new();
            cache.write(&mut buf).map_err(|e| Error::io(&path, e))?;
            std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
        art.json(
            Stage::Score,
            "score_report.json",
            &ScoreReport {
                scorer: &id,
                scored: scored.scores.len(),
                failures: &log.failures,
                clamped: &log.clamped,
            },
        )?;
        if !scored.scores.is_empty() {
            let grid = unit_grid(CDF_GRID_POINTS);
            let series = Dimension::ALL.map(|d| {
                let v: Vec<f64> = scored.scores.values().map(|s| s.get(d)).collect();
                empirical_cdf(&v, &grid)
            });
            art.csv(
                Stage::Score,
                report::cdf_figure("score_cdf_all.csv", &grid, &series, prov),
            );
            art.csv(Stage::Score, report::pearson_table(&pearson_matrix(&scored), prov));
        } else {
            art.note(Stage::Score, "no tweet was scored".into());
        }
        for (tweet, msg) in &log.failures {
            art.note(Stage::Score, format!("scoring failed for {tweet}: {msg}"));
        }
        *log_out = log;
        Ok(scored)
    }

    fn summarize(
        &self,
        scored: &ScoredCorpus<'_>,
        eligible: &BTreeSet<String>,
        art: &mut Artifacts,
        prov: &Provenance,
    ) -> Result<Vec<ProfileSummary>> {
        let t = &self.config.thresholds;
        let (summaries, unscored) = summarize_profiles(scored, eligible, t.binarize)?;
        for id in unscored {
            art.note(Stage::Summarize, format!("{id}: eligible but no scored tweets"));
        }
        for &dim in &self.config.dimensions {
            art.csv(
                Stage::Summarize,
                report::summary_table(&summaries, dim, t.median, t.gini, prov),
            );
            art.csv(
                Stage::Summarize,
                report::scatter_figure(&summaries, dim, t.median, t.gini, prov),
            );
        }
        if !summaries.is_empty() {
            let grid = unit_grid(CDF_GRID_POINTS);
            let series = Dimension::ALL.map(|d| {
                let v: Vec<f64> = summaries.iter().map(|s| s.get(d).binarized_proportion).collect();
                empirical_cdf(&v, &grid)
            });
            art.csv(
                Stage::Summarize,
                report::cdf_figure("binarized_cdf_all.csv", &grid, &series, prov),
            );
        }
        Ok(summaries)
    }

    fn characterize(
        &self,
        r: &mut DimensionReport,
        corpus: &Corpus,
        inputs: &Inputs,
        art: &mut Artifacts,
        sub_seeds: &mut BTreeMap<String, u64>,
    ) -> Result<()> {
        let cfg = &self.config;
        let dim = r.dimension;
        let sel = r.selection.clone();
        for g in [&mut r.focus, &mut r.random] {
            let ids = match g.kind {
                GroupKind::Focus => &sel.focus,
                GroupKind::Random => &sel.random_baseline,
            };
            let label = g.kind.label();
            g.diversity = Some(diversity_stats(ids, corpus, &inputs.rules, &inputs.categories));
            g.top_hashtags = Some(top_hashtags(ids, corpus, cfg.report.top_hashtags));
            g.categories = Some(category_histogram(
                ids,
                corpus,
                &inputs.rules,
                &inputs.categories,
                cfg.report.top_categories,
            ));

            let docs: Vec<_> = ids
                .iter()
                .map(|id| {
                    normalize(
                        id,
                        corpus.profile(id).unwrap_or(&[]),
                        cfg.include_retweets,
                        &inputs.stopwords,
                    )
                })
                .collect();
            let s = seed::lda(cfg.seed, dim.name(), label);
            sub_seeds.insert(format!("lda/{dim}/{label}"), s);
            g.topics = Some(match lda_fit(&docs, &cfg.lda_params(s)) {
                Ok(model) => (0..model.k)
                    .map(|t| top_words(&model, t, cfg.lda.top_words))
                    .collect::<Result<_>>()?,
                Err(e) => {
                    art.note(Stage::Characterize, format!("{dim}/{label}: topics skipped: {e}"));
                    Vec::new()
                }
            });

            let mut metrics = Vec::new();
            for id in ids {
                let texts = corpus
                    .profile(id)
                    .unwrap_or(&[])
                    .iter()
                    .filter(|t| cfg.include_retweets || !t.is_retweet)
                    .map(|t| t.text.as_str());
                match readability(texts) {
                    Ok(m) => metrics.push(m),
                    Err(e) => art.note(Stage::Characterize, format!("{id}: readability skipped: {e}")),
                }
            }
            g.readability = Some(group_readability(&metrics));
        }
        Ok(())
    }

    /// KL between the per-dimension focus and random groups for domain and
    /// hashtag counts per profile and for within-group similarities.
    fn kl_compare(
        &self,
        reports: &[DimensionReport],
        corpus: &Corpus,
        inputs: &Inputs,
        art: &mut Artifacts,
        prov: &Provenance,
    ) -> Result<()> {
        let mut domain_counts = Vec::new();
        let mut tag_counts = Vec::new();
        let mut domain_sim = Vec::new();
        let mut tag_sim = Vec::new();
        for r in reports.iter().filter(|r| r.similarity_domains.is_some()) {
            let dim = r.dimension;
            for (kind, ids, idx) in [
                (GroupKind::Focus, &r.selection.focus, 0),
                (GroupKind::Random, &r.selection.random_baseline, 1),
            ] {
                let name = format!("{}:{dim}", kind.label());
                let dc = ids
                    .iter()
                    .map(|p| profile_domains(p, corpus, &inputs.rules).len() as f64)
                    .collect();
                let tc = ids
                    .iter()
                    .map(|p| {
                        corpus
                            .profile(p)
                            .unwrap_or(&[])
                            .iter()
                            .map(|t| t.hashtags.len())
                            .sum::<usize>() as f64
                    })
                    .collect();
                domain_counts.push((name.clone(), dc));
                tag_counts.push((name.clone(), tc));
                let ds = &r.similarity_domains.as_ref().expect("filtered")[idx];
                let hs = &r.similarity_hashtags.as_ref().expect("similarity computed together")[idx];
                if !ds.too_small {
                    domain_sim.push((name.clone(), ds.values.clone()));
                    tag_sim.push((name, hs.values.clone()));
                }
            }
        }
        for (file, groups, range) in [
            ("kl_domain_counts_all.csv", domain_counts, None),
            ("kl_hashtag_counts_all.csv", tag_counts, None),
            ("kl_domain_similarity_all.csv", domain_sim, Some(1.0)),
            ("kl_hashtag_similarity_all.csv", tag_sim, Some(1.0)),
        ] {
            self.kl_file(file, groups, range, Stage::Compare, art, prov)?;
        }
        Ok(())
    }

    fn kl_intervals(&self, reports: &[DimensionReport], art: &mut Artifacts, prov: &Provenance) -> Result<()> {
        let mut groups = Vec::new();
        for r in reports {
            for g in [&r.focus, &r.random] {
                if let Some(v) = g.interval_pdf.as_ref().and_then(|p| p.distribution.as_ref()) {
                    groups.push((format!("{}:{}", g.kind.label(), r.dimension), v.clone()));
                }
            }
        }
        if groups.len() < 2 {
            art.note(
                Stage::Temporal,
                "interval KL skipped: fewer than two groups with intervals".into(),
            );
            return Ok(());
        }
        let names: Vec<String> = groups.iter().map(|(n, _)| n.clone()).collect();
        let matrix = groups
            .iter()
            .map(|(_, p)| {
                groups
                    .iter()
                    .map(|(_, q)| crate::compare::kl_divergence(p, q, crate::compare::DEFAULT_KL_EPSILON))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let note = format!(
            "bins={} range=[0,{}] minutes",
            (INTERVAL_PDF_MAX_MINUTES / INTERVAL_PDF_BIN_MINUTES) as usize,
            INTERVAL_PDF_MAX_MINUTES
        );
        art.csv(
            Stage::Temporal,
            report::kl_table("kl_intervals_all.csv", &names, &matrix, &note, prov),
        );
        Ok(())
    }

    fn kl_file(
        &self,
        file: &str,
        groups: Vec<(String, Vec<f64>)>,
        hi: Option<f64>,
        stage: Stage,
        art: &mut Artifacts,
        prov: &Provenance,
    ) -> Result<()> {
        let groups: Vec<_> = groups.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        if groups.len() < 2 {
            art.note(stage, format!("{file} skipped: fewer than two non-empty groups"));
            return Ok(());
        }
        let hi = hi.unwrap_or_else(|| {
            let max = groups.iter().flat_map(|(_, v)| v).fold(0.0f64, |a, b| a.max(*b));
            if max > 0.0 {
                max
            } else {
                1.0
            }
        });
        let bins = self.config.report.kl_bins;
        let matrix = kl_matrix(&groups, 0.0, hi, bins)?;
        let names: Vec<String> = groups.into_iter().map(|(n, _)| n).collect();
        let note = format!("bins={bins} range=[0,{hi}]");
        art.csv(stage, report::kl_table(file, &names, &matrix, &note, prov));
        Ok(())
    }

    fn trend(&self, scored: &ScoredCorpus<'_>, art: &mut Artifacts, prov: &Provenance) {
        let series = Dimension::ALL.map(|d| monthly_median_series(scored, d));
        art.csv(Stage::Temporal, report::monthly_figure(&series, prov));
        let fits: Vec<_> = Dimension::ALL
            .iter()
            .map(|d| (*d, monthly_trend(&series[d.index()]).ok()))
            .collect();
        art.csv(Stage::Temporal, report::trend_table(&fits, prov));
    }

    fn write(
        &self,
        art: &Artifacts,
        sub_seeds: BTreeMap<String, u64>,
        failed: Option<Stage>,
        out_dir: &Path,
    ) -> Result<Manifest> {
        let prov = self.provenance();
        let previous = read_manifest(out_dir).filter(|m| m.config_hash == prov.config_hash);
        let mut manifest = previous.unwrap_or_else(|| Manifest {
            config_hash: prov.config_hash.clone(),
            seed: prov.seed,
            scorer: prov.scorer.clone(),
            dimensions: Vec::new(),
            config: serde_json::Value::Null,
            sub_seeds: BTreeMap::new(),
            stages: Vec::new(),
            files: BTreeMap::new(),
            complete: true,
        });
        manifest.scorer = prov.scorer.clone();
        manifest.dimensions = self.config.dimensions.iter().map(|d| d.name().to_string()).collect();
        manifest.config = self.config.echo();
        manifest.sub_seeds.extend(sub_seeds);

        for (_, name, bytes) in &art.files {
            let path = out_dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        for &stage in &art.wanted {
            let files: Vec<String> = art
                .files
                .iter()
                .filter(|(s, ..)| *s == stage)
                .map(|(_, n, _)| n.clone())
                .collect();
            if let Some(old) = manifest.stage(stage).map(|s| s.files.clone()) {
                for f in &old {
                    manifest.files.remove(f);
                }
            }
            let status = match failed {
                Some(f) if f == stage => "failed",
                Some(f) if f < stage || stage.requires().contains(&f) => "not_run",
                _ => "ok",
            };
            for (_, n, bytes) in art.files.iter().filter(|(s, ..)| *s == stage) {
                manifest.files.insert(n.clone(), hex(&Sha256::digest(bytes)));
            }
            let record = StageRecord {
                stage,
                status: status.into(),
                files,
                notes: art.notes.get(&stage).cloned().unwrap_or_default(),
            };
            match manifest.stages.iter_mut().find(|s| s.stage == stage) {
                Some(slot) => *slot = record,
                None => manifest.stages.push(record),
            }
        }
        manifest.stages.sort_by_key(|s| s.stage);
        manifest.complete = manifest.stages.iter().all(|s| s.status == "ok");

        let path = out_dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_manifest(dir: &Path) -> Option<Manifest> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn temporal_group(g: &mut GroupReport, ids: &BTreeSet<String>, corpus: &Corpus) -> Result<()> {
    let all = |_: &TweetRecord| true;
    let IntervalSeries { pooled, .. } = interval_series(ids, corpus, all);
    if !pooled.is_empty() {
        g.interval_pdf = Some(interval_pdf(
            &pooled,
            INTERVAL_PDF_BIN_MINUTES,
            INTERVAL_PDF_MAX_MINUTES,
        )?);
        let cdf = interval_cdf(&pooled)?;
        g.interval_cdf = Some(cdf.grid(CDF_GRID_POINTS));
        g.interval_quantiles = Some(IntervalQuantiles {
            n_intervals: pooled.len(),
            median: cdf.quantile(0.5)?,
            p80: cdf.quantile(0.8)?,
        });
    }
    g.hour_pdf = Some(hour_of_day_pdf(ids, corpus, &all)?);
    g.weekday_pdf = Some(day_of_week_pdf(ids, corpus, &all)?);
    Ok(())
}
