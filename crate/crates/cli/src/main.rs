//! `consistox` command line.
//!
//! Exit codes: 0 success, 1 data or runtime failure (for example a malformed
//! line in strict mode), 2 configuration error (bad config, missing input).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use consistox::config::{Backend, Overrides, PipelineConfig};
use consistox::pipeline::{Pipeline, RunOutcome, Stage};
use consistox::scorer::{RemoteScorer, Scorer, ScorerError, Transport};
use consistox::{Dimension, Error};

#[derive(Parser)]
#[command(
    name = "consistox",
    version,
    about = "Find and characterize consistently toxic profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the corpus; write the ingestion report and index.
    Ingest(StageArgs),
    /// Score every admitted tweet, filling the score cache.
    Score(StageArgs),
    /// Per-profile median, Gini and binarized proportion.
    Summarize(StageArgs),
    /// Focus selection, obscene filter and random baseline per dimension.
    Select(StageArgs),
    /// URLs, domains, hashtags, topics and readability per group.
    Characterize(StageArgs),
    /// Jaccard similarity CDFs and KL matrices.
    Compare(StageArgs),
    /// Posting-time distributions and the monthly score trend.
    Temporal(StageArgs),
    /// Every stage in order.
    RunAll(StageArgs),
    /// Write a synthetic corpus with planted focus profiles.
    Synth(SynthArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these dimensions (repeatable).
    #[arg(long = "dimension")]
    dimensions: Vec<String>,
    #[arg(long)]
    median_threshold: Option<f64>,
    #[arg(long)]
    gini_threshold: Option<f64>,
    #[arg(long)]
    min_tweets: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    n_focus: usize,
    #[arg(long, default_value_t = 200)]
    n_random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus destination (JSON lines).
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the planted profile ids, one per line.
    #[arg(long)]
    planted: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::MissingFile(_) => 2,
            Error::Stage { source, .. } if matches!(**source, Error::Config(_) | Error::MissingFile(_)) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: 2, message }
}

struct UreqTransport(ureq::Agent);

impl Transport for UreqTransport {
    fn post(&self, url: &str, api_key: &str, body: &str) -> Result<String, ScorerError> {
        let full = if api_key.is_empty() {
            url.to_string()
        } else {
            format!("{url}?key={api_key}")
        };
        match self
            .0
            .post(&full)
            .set("Content-Type", "application/json")
            .send_string(body)
        {
            Ok(resp) => resp.into_string().map_err(|e| ScorerError::Transient(e.to_string())),
            Err(ureq::Error::Status(code, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                if code == 429 || code >= 500 {
                    Err(ScorerError::Transient(format!("HTTP {code}: {text}")))
                } else {
                    Err(ScorerError::Permanent(format!("HTTP {code}: {text}")))
                }
            }
            Err(e) => Err(ScorerError::Transient(e.to_string())),
        }
    }
}

fn load_config(args: &StageArgs) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    let dimensions = if args.dimensions.is_empty() {
        None
    } else {
        Some(
            args.dimensions
                .iter()
                .map(|d| d.parse::<Dimension>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| config_error(e.to_string()))?,
        )
    };
    cfg.apply(&Overrides {
        seed: args.seed,
        dimensions,
        median_threshold: args.median_threshold,
        gini_threshold: args.gini_threshold,
        min_tweets: args.min_tweets,
        output_dir: args.output_dir.clone(),
    });
    cfg.validate()?;
    Ok(cfg)
}

fn build_scorer(cfg: &PipelineConfig) -> Result<Box<dyn Scorer>, Failure> {
    match cfg.scorer.backend {
        Backend::Lexicon => Ok(Box::new(cfg.load_lexicon()?)),
        Backend::Remote => {
            let url = cfg.scorer.url.clone().expect("validated");
            let key = std::env::var(&cfg.scorer.api_key_env)
                .map_err(|_| config_error(format!("environment variable {} is not set", cfg.scorer.api_key_env)))?;
            let agent = ureq::AgentBuilder::new()
                .timeout(std::time::Duration::from_secs(30))
                .build();
            let mut scorer =
                RemoteScorer::new(UreqTransport(agent), url, key).requests_per_minute(cfg.scorer.requests_per_minute);
            if let Some(m) = &cfg.scorer.model {
                scorer = scorer.model(m.clone());
            }
            Ok(Box::new(scorer))
        }
    }
}

fn summarize_outcome(stages: &[Stage], outcome: &RunOutcome, out_dir: &std::path::Path) {
    let log = &outcome.score_log;
    if stages.iter().any(|s| *s >= Stage::Score) {
        eprintln!(
            "scored {} tweets ({} from cache, {} scorer calls, {} failures)",
            log.considered - log.failures.len(),
            log.cache_hits,
            log.scorer_calls,
            log.failures.len()
        );
    }
    for sel in &outcome.selections {
        eprintln!(
            "{}: {} focus, {} random, {} removed as obscene",
            sel.dimension,
            sel.focus.len(),
            sel.random_baseline.len(),
            sel.removed_obscene.len()
        );
    }
    if let Some(m) = &outcome.manifest {
        eprintln!(
            "{} files listed in {}",
            m.files.len(),
            out_dir.join("manifest.json").display()
        );
    }
}

fn run_stages(args: &StageArgs, stages: &[Stage]) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let scorer = build_scorer(&cfg)?;
    let out_dir = cfg.output_dir.clone();
    let outcome = Pipeline::new(cfg, scorer.as_ref()).run(stages)?;
    if stages.contains(&Stage::Ingest) {
        let log = &outcome.ingestion;
        eprintln!(
            "read {} lines: {} valid, {} skipped, {} duplicates",
            log.lines_read,
            log.valid,
            log.skipped.len(),
            log.duplicates.len()
        );
    }
    summarize_outcome(stages, &outcome, &out_dir);
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let s = consistox::synth::synthesize(args.n_focus, args.n_random, args.seed);
    let io = |path: &PathBuf, e: std::io::Error| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    };
    let mut buf = Vec::new();
    s.corpus.write_jsonl(&mut buf).map_err(|e| io(&args.output, e))?;
    std::fs::write(&args.output, buf).map_err(|e| io(&args.output, e))?;
    if let Some(p) = &args.planted {
        let text: String = s.planted.iter().map(|id| format!("{id}\n")).collect();
        std::fs::write(p, text).map_err(|e| io(p, e))?;
    }
    eprintln!(
        "wrote {} profiles ({} planted), {} tweets to {}",
        s.corpus.n_profiles(),
        s.planted.len(),
        s.corpus.n_tweets(),
        args.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => run_stages(a, &[Stage::Ingest]),
        Command::Score(a) => run_stages(a, &[Stage::Score]),
        Command::Summarize(a) => run_stages(a, &[Stage::Summarize]),
        Command::Select(a) => run_stages(a, &[Stage::Select]),
        Command::Characterize(a) => run_stages(a, &[Stage::Characterize]),
        Command::Compare(a) => run_stages(a, &[Stage::Compare]),
        Command::Temporal(a) => run_stages(a, &[Stage::Temporal]),
        Command::RunAll(a) => run_stages(a, &Stage::ALL),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
