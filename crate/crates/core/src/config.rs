//! Pipeline configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//! dimensions = ["identity_attack", "inflammatory", "insult", "threat"]
//!
//! [inputs]
//! corpus = ["timelines.jsonl"]
//! obscene_lexicon = "obscene.txt"     # optional
//! category_map = "categories.csv"     # optional, domain,category
//!
//! [thresholds]
//! median = 0.4
//! gini = 0.25
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::consistency::{
    self, SelectionParams, DEFAULT_BINARIZE_THRESHOLD, DEFAULT_GINI_THRESHOLD, DEFAULT_MEDIAN_THRESHOLD,
    DEFAULT_OBSCENE_FRACTION,
};
use crate::corpus::Eligibility;
use crate::scorer::{Dimension, Lexicon, ScoreCache, DEFAULT_REQUESTS_PER_MINUTE};
use crate::textstats::{self, LdaParams};
use crate::webcontent::{CategoryMap, SuffixRuleSet};
use crate::{Error, Result};

pub const DEFAULT_DIMENSIONS: [Dimension; 4] = [
    Dimension::IdentityAttack,
    Dimension::Inflammatory,
    Dimension::Insult,
    Dimension::Threat,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<Dimension>,
    /// Abort on the first malformed or duplicate line instead of skipping it.
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "yes")]
    pub include_retweets: bool,
    #[serde(default = "default_lang")]
    pub lang: String,
    pub inputs: Inputs,
    #[serde(default)]
    pub scorer: ScorerConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub corpus: Vec<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub obscene_lexicon: Option<PathBuf>,
    pub suffix_rules: Option<PathBuf>,
    pub category_map: Option<PathBuf>,
    /// Lexicon for the lexicon scorer; the bundled one when absent.
    pub lexicon: Option<PathBuf>,
    /// Defaults to `score_cache.jsonl` in the output directory. Need not exist.
    pub score_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Lexicon,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    #[serde(default)]
    pub backend: Backend,
    pub url: Option<String>,
    /// Environment variable holding the API key; the key never enters the config.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: u32,
    pub model: Option<String>,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            backend: Backend::Lexicon,
            url: None,
            api_key_env: default_key_env(),
            requests_per_minute: default_rpm(),
            model: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub median: f64,
    pub gini: f64,
    pub binarize: f64,
    pub obscene: f64,
    pub min_tweets: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            median: DEFAULT_MEDIAN_THRESHOLD,
            gini: DEFAULT_GINI_THRESHOLD,
            binarize: DEFAULT_BINARIZE_THRESHOLD,
            obscene: DEFAULT_OBSCENE_FRACTION,
            min_tweets: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub k: usize,
    /// `50 / k` when absent.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub top_words: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 3,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            top_words: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub top_hashtags: usize,
    pub top_categories: usize,
    /// Bins for the KL histograms.
    pub kl_bins: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            top_hashtags: 10,
            top_categories: 10,
            kl_bins: crate::compare::DEFAULT_BINS,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_dimensions() -> Vec<Dimension> {
    DEFAULT_DIMENSIONS.to_vec()
}

fn yes() -> bool {
    true
}

fn default_lang() -> String {
    "en".into()
}

fn default_key_env() -> String {
    "PERSPECTIVE_API_KEY".into()
}

fn default_rpm() -> u32 {
    DEFAULT_REQUESTS_PER_MINUTE
}

/// Command-line values that replace their config-file counterparts.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dimensions: Option<Vec<Dimension>>,
    pub median_threshold: Option<f64>,
    pub gini_threshold: Option<f64>,
    pub min_tweets: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.output_dir = cfg.resolve(&cfg.output_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    /// Minimal config for a list of corpus files, everything else default.
    pub fn for_corpus(corpus: Vec<PathBuf>, output_dir: PathBuf, seed: u64) -> Self {
        PipelineConfig {
            seed,
            output_dir,
            dimensions: default_dimensions(),
            strict: false,
            include_retweets: true,
            lang: default_lang(),
            inputs: Inputs {
                corpus,
                ..Default::default()
            },
            scorer: ScorerConfig::default(),
            thresholds: Thresholds::default(),
            lda: LdaConfig::default(),
            report: ReportConfig::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.dimensions {
            self.dimensions = d.clone();
        }
        if let Some(m) = o.median_threshold {
            self.thresholds.median = m;
        }
        if let Some(g) = o.gini_threshold {
            self.thresholds.gini = g;
        }
        if let Some(n) = o.min_tweets {
            self.thresholds.min_tweets = n;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn existing(&self, p: &Path) -> Result<PathBuf> {
        let full = self.resolve(p);
        if full.is_file() {
            Ok(full)
        } else {
            Err(Error::MissingFile(full))
        }
    }

    /// Threshold ranges, non-empty corpus list and dimension list, and
    /// presence of every referenced input file.
    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.median", t.median),
            ("thresholds.gini", t.gini),
            ("thresholds.binarize", t.binarize),
            ("thresholds.obscene", t.obscene),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.inputs.corpus.is_empty() {
            return Err(Error::Config("inputs.corpus lists no files".into()));
        }
        if self.dimensions.is_empty() {
            return Err(Error::Config("dimensions is empty".into()));
        }
        if self.lda.k == 0 || !(self.lda.beta > 0.0) || self.lda.alpha.is_some_and(|a| !(a > 0.0)) {
            return Err(Error::Config("lda needs k ≥ 1 and positive alpha/beta".into()));
        }
        if self.report.kl_bins == 0 {
            return Err(Error::Config("report.kl_bins must be at least 1".into()));
        }
        if self.scorer.backend == Backend::Remote && self.scorer.url.is_none() {
            return Err(Error::Config("scorer.backend = \"remote\" needs scorer.url".into()));
        }
        for p in &self.inputs.corpus {
            self.existing(p)?;
        }
        let i = &self.inputs;
        for p in [
            &i.stopwords,
            &i.obscene_lexicon,
            &i.suffix_rules,
            &i.category_map,
            &i.lexicon,
        ]
        .into_iter()
        .flatten()
        {
            self.existing(p)?;
        }
        Ok(())
    }

    pub fn corpus_paths(&self) -> Vec<PathBuf> {
        self.inputs.corpus.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn score_cache_path(&self) -> PathBuf {
        match &self.inputs.score_cache {
            Some(p) => self.resolve(p),
            None => self.output_dir.join("score_cache.jsonl"),
        }
    }

    pub fn eligibility(&self) -> Eligibility {
        Eligibility {
            min_tweets: self.thresholds.min_tweets,
            lang: self.lang.clone(),
            include_retweets: self.include_retweets,
        }
    }

    pub fn selection_params(&self) -> SelectionParams {
        SelectionParams {
            median_threshold: self.thresholds.median,
            gini_threshold: self.thresholds.gini,
            obscene_fraction: self.thresholds.obscene,
            min_tweets: self.thresholds.min_tweets,
        }
    }

    pub fn lda_params(&self, seed: u64) -> LdaParams {
        LdaParams {
            k: self.lda.k,
            alpha: self.lda.alpha,
            beta: self.lda.beta,
            iterations: self.lda.iterations,
            seed,
        }
    }

    fn open(&self, p: &Path) -> Result<BufReader<File>> {
        let full = self.existing(p)?;
        File::open(&full).map(BufReader::new).map_err(|e| Error::io(full, e))
    }

    pub fn load_stopwords(&self) -> Result<HashSet<String>> {
        match &self.inputs.stopwords {
            Some(p) => textstats::load_stopwords(self.open(p)?),
            None => Ok(textstats::bundled_stopwords()),
        }
    }

    pub fn load_obscene(&self) -> Result<HashSet<String>> {
        match &self.inputs.obscene_lexicon {
            Some(p) => consistency::load_obscene_lexicon(self.open(p)?),
            None => Ok(HashSet::new()),
        }
    }

    pub fn load_suffix_rules(&self) -> Result<SuffixRuleSet> {
        match &self.inputs.suffix_rules {
            Some(p) => SuffixRuleSet::parse(self.open(p)?),
            None => Ok(SuffixRuleSet::bundled()),
        }
    }

    pub fn load_categories(&self) -> Result<CategoryMap> {
        match &self.inputs.category_map {
            Some(p) => CategoryMap::from_csv(self.open(p)?),
            None => Ok(CategoryMap::default()),
        }
    }

    pub fn load_lexicon(&self) -> Result<Lexicon> {
        match &self.inputs.lexicon {
            Some(p) => Lexicon::from_csv(self.open(p)?),
            None => Ok(Lexicon::bundled()),
        }
    }

    /// Cached scores for `scorer_id`, or an empty cache when the file is absent.
    pub fn load_cache(&self, scorer_id: &str) -> Result<ScoreCache> {
        let path = self.score_cache_path();
        match File::open(&path) {
            Ok(f) => ScoreCache::load(BufReader::new(f), scorer_id),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ScoreCache::new(scorer_id)),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// The config as JSON with `output_dir` dropped, so moving the output
    /// does not change the hash.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("output_dir");
        }
        v
    }

    /// First 16 hex digits of the SHA-256 of [`echo`](Self::echo).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.echo().to_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!("{extra}\n[inputs]\ncorpus = [\"c.jsonl\"]\n")
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = PipelineConfig::from_toml_str(&minimal(""), "/data").unwrap();
        assert_eq!(cfg.thresholds, Thresholds::default());
        assert_eq!(cfg.dimensions, DEFAULT_DIMENSIONS);
        assert_eq!(cfg.lda.k, 3);
        assert_eq!(cfg.output_dir, PathBuf::from("/data/out"));
        assert_eq!(cfg.corpus_paths(), [PathBuf::from("/data/c.jsonl")]);
        assert_eq!(cfg.score_cache_path(), PathBuf::from("/data/out/score_cache.jsonl"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_thresholds() {
        assert!(matches!(
            PipelineConfig::from_toml_str(&minimal("bogus = 1\n"), "."),
            Err(Error::Config(_))
        ));
        let cfg = PipelineConfig::from_toml_str(&minimal("[thresholds]\ngini = 1.5\n"), ".").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("gini")));
        assert!(PipelineConfig::from_toml_str(&minimal("dimensions = [\"rudeness\"]\n"), ".").is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let cfg = PipelineConfig::from_toml_str(&minimal(""), "/nonexistent-dir").unwrap();
        match cfg.validate() {
            Err(Error::MissingFile(p)) => assert_eq!(p, PathBuf::from("/nonexistent-dir/c.jsonl")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_win() {
        let mut cfg = PipelineConfig::from_toml_str(&minimal("seed = 1\n"), ".").unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            dimensions: Some(vec![Dimension::Threat]),
            median_threshold: Some(0.5),
            gini_threshold: None,
            min_tweets: Some(3),
            output_dir: Some("elsewhere".into()),
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.dimensions, [Dimension::Threat]);
        assert_eq!(cfg.thresholds.median, 0.5);
        assert_eq!(cfg.thresholds.gini, 0.25);
        assert_eq!(cfg.thresholds.min_tweets, 3);
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = PipelineConfig::from_toml_str(&minimal(""), ".").unwrap();
        let mut b = a.clone();
        b.output_dir = "other".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
