//! Acceptance checks, one line per criterion. Runs without a test harness so
//! the PASS/FAIL lines always reach stdout; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use consistox::compare::{histogram, jaccard, kl_divergence, EmpiricalDistribution};
use consistox::config::PipelineConfig;
use consistox::consistency::gini;
use consistox::corpus::Eligibility;
use consistox::pipeline::Pipeline;
use consistox::scorer::Lexicon;
use consistox::synth::synthesize;
use consistox::temporal::special::regularized_incomplete_beta;
use consistox::temporal::{hour_of_day_pdf, interval_pdf, interval_series, ols_trend};
use consistox::textstats::{flesch, lda_fit, readability, top_words, LdaParams, TokenizedDoc};
use consistox::webcontent::{extract_sld, SuffixRuleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "{what} took {took:.2?}, limit {limit:?}");
    Ok(took)
}

fn brute_gini(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for a in v {
        for b in v {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n * mean)
}

fn gini_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let d = (gini(&v).unwrap() - brute_gini(&v)).abs();
        worst = worst.max(d);
    }
    ensure!(worst <= 1e-12, "max deviation from pairwise formula {worst:e}");
    ensure!(
        gini(&[0.5, 0.5, 0.5]).unwrap() == 0.0,
        "gini of constant vector is not 0"
    );
    ensure!(gini(&[0.0, 1.0]).unwrap() == 0.5, "gini([0,1]) is not 0.5");
    let took = within(start, Duration::from_secs(5), "1000 vectors")?;
    Ok(format!("max deviation {worst:.1e} over 1000 vectors in {took:.2?}"))
}

fn write_synth(dir: &Path, n_focus: usize, n_random: usize, seed: u64) -> BTreeSet<String> {
    let s = synthesize(n_focus, n_random, seed);
    let mut buf = Vec::new();
    s.corpus.write_jsonl(&mut buf).unwrap();
    std::fs::write(dir.join("corpus.jsonl"), buf).unwrap();
    s.planted
}

fn planted_recovery() -> Result<String, String> {
    let start = Instant::now();
    let lexicon = Lexicon::bundled();
    for seed in 0..5u64 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let planted = write_synth(tmp.path(), 10, 200, seed);
        let cfg = PipelineConfig::for_corpus(vec![tmp.path().join("corpus.jsonl")], tmp.path().join("out"), seed);
        let t = &cfg.thresholds;
        ensure!(
            t.median == 0.4 && t.gini == 0.25 && t.min_tweets == 10,
            "default thresholds differ from 0.4 / 0.25 / 10"
        );
        let outcome = Pipeline::new(cfg, &lexicon).run_all().map_err(|e| e.to_string())?;
        for sel in &outcome.selections {
            let tp = sel.focus.intersection(&planted).count();
            ensure!(
                sel.focus == planted,
                "seed {seed}, {}: {} selected, {tp} of {} planted",
                sel.dimension,
                sel.focus.len(),
                planted.len()
            );
        }
    }
    let took = within(start, Duration::from_secs(60), "five runs")?;
    Ok(format!(
        "precision = recall = 1.0 on 5 seeds, every dimension, in {took:.2?}"
    ))
}

fn readability_formulas() -> Result<String, String> {
    let m = readability(["the cat sat"]).map_err(|e| e.to_string())?;
    ensure!((m.ari - (-5.80)).abs() <= 0.01, "ARI(\"the cat sat\") = {}", m.ari);
    let f = flesch(10, 1, 15);
    ensure!((f - 69.785).abs() <= 1e-6, "Flesch(10, 1, 15) = {f}");
    let r = readability(["one two three four five six."]).map_err(|e| e.to_string())?;
    ensure!(r.richness == 1.0, "richness of distinct words = {}", r.richness);
    Ok(format!("ARI {:.4}, Flesch {f:.6}, richness {}", m.ari, r.richness))
}

fn dist(p: &[f64]) -> EmpiricalDistribution {
    let n = p.len();
    EmpiricalDistribution {
        edges: (0..n).map(|i| i as f64 / n as f64).collect(),
        probabilities: p.to_vec(),
    }
}

fn jaccard_kl() -> Result<String, String> {
    let a: BTreeSet<&str> = ["a", "b"].into();
    let b: BTreeSet<&str> = ["b", "c"].into();
    ensure!(
        jaccard(&a, &b) == 1.0 / 3.0,
        "jaccard({{a,b}},{{b,c}}) = {}",
        jaccard(&a, &b)
    );

    let kl = |p: &[f64], q: &[f64]| kl_divergence(&dist(p), &dist(q), 1e-10).unwrap();
    let self_kl = kl(&[0.2, 0.0, 0.8], &[0.2, 0.0, 0.8]);
    ensure!(self_kl <= 1e-6, "D(p||p) = {self_kl}");
    let d = kl(&[0.5, 0.5], &[0.9, 0.1]);
    ensure!((d - 0.5108).abs() <= 1e-3, "D([.5,.5]||[.9,.1]) = {d}");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..1000 {
        let bins = rng.gen_range(2..=20);
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let n = rng.gen_range(1..=40);
            (0..n).map(|_| rng.gen::<f64>().powi(3)).collect()
        };
        let p = histogram(&sample(&mut rng), 0.0, 1.0, bins).unwrap();
        let q = histogram(&sample(&mut rng), 0.0, 1.0, bins).unwrap();
        let v = kl_divergence(&p, &q, 1e-10).unwrap();
        ensure!(v >= 0.0 && v.is_finite(), "pair {i}: D = {v}");
    }
    Ok(format!(
        "jaccard 1/3, D(p||p) {self_kl:.1e}, D = {d:.4} nats, 1000 pairs non-negative"
    ))
}

fn two_vocab_docs(seed: u64) -> Vec<TokenizedDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut docs = Vec::new();
    for (prefix, n) in [("apple", 50), ("zebra", 50)] {
        for d in 0..n {
            let tokens = (0..60)
                .map(|_| format!("{prefix}{:03}", rng.gen_range(0..100)))
                .collect();
            docs.push(TokenizedDoc {
                profile_id: format!("{prefix}-{d:02}"),
                tokens,
                ..Default::default()
            });
        }
    }
    docs
}

fn lda_separation() -> Result<String, String> {
    let start = Instant::now();
    let mut separated = 0;
    for seed in 0..5u64 {
        let model = lda_fit(&two_vocab_docs(seed), &LdaParams::new(2, seed)).map_err(|e| e.to_string())?;
        for row in model.topic_word.iter().chain(&model.doc_topic) {
            let s: f64 = row.iter().sum();
            ensure!((s - 1.0).abs() < 1e-9, "seed {seed}: a distribution sums to {s}");
        }
        let mut majority = Vec::new();
        for k in 0..2 {
            let words = top_words(&model, k, 10).map_err(|e| e.to_string())?;
            let apples = words.iter().filter(|(w, _)| w.starts_with("apple")).count();
            majority.push(apples.max(10 - apples));
        }
        if majority.iter().all(|m| *m >= 9) {
            separated += 1;
        }
    }
    ensure!(separated >= 4, "separated in {separated} of 5 seeds");
    let took = within(start, Duration::from_secs(30), "five fits")?;
    Ok(format!(
        "separated in {separated} of 5 seeds, 1000 sweeps each, in {took:.2?}"
    ))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ols_suite() -> Result<String, String> {
    let line: Vec<(f64, f64)> = (0..24).map(|i| (i as f64, 0.3 + 0.025 * i as f64)).collect();
    let fit = ols_trend(&line).map_err(|e| e.to_string())?;
    ensure!((fit.slope - 0.025).abs() <= 1e-12, "slope {}", fit.slope);
    ensure!(fit.r2 == 1.0, "R² {}", fit.r2);
    ensure!(fit.p_value < 1e-15, "p {}", fit.p_value);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut covered = 0;
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = (0..36)
            .map(|i| (i as f64, 0.2 + 0.1 * i as f64 + 0.5 * normal(&mut rng)))
            .collect();
        let f = ols_trend(&pts).map_err(|e| e.to_string())?;
        if (f.slope - 0.1).abs() <= 2.0 * f.slope_stderr {
            covered += 1;
        }
    }
    ensure!(covered >= 90, "slope within 2 SE in {covered} of 100 trials");

    let mut worst = 0.0f64;
    for (i, (a, b)) in [(0.5, 0.5), (1.0, 3.0), (2.5, 7.0), (10.0, 0.8)].iter().enumerate() {
        for j in 0..25 {
            let x = (i * 25 + j) as f64 / 100.0 + 0.005;
            let s = regularized_incomplete_beta(*a, *b, x) + regularized_incomplete_beta(*b, *a, 1.0 - x);
            worst = worst.max((s - 1.0).abs());
        }
    }
    ensure!(worst <= 1e-10, "beta reflection off by {worst:e}");
    Ok(format!(
        "exact line ok, {covered}/100 within 2 SE, beta identity within {worst:.1e}"
    ))
}

fn temporal_discrimination() -> Result<String, String> {
    let s = synthesize(10, 200, 0);
    let rule = Eligibility::default();
    let admit = |r: &consistox::TweetRecord| rule.admits(r);
    let focus = s.planted.clone();
    let random: BTreeSet<String> = s
        .corpus
        .profile_ids()
        .filter(|id| !focus.contains(*id))
        .map(String::from)
        .collect();

    let pdf = |group: &BTreeSet<String>| {
        let series = interval_series(group, &s.corpus, admit);
        interval_pdf(&series.pooled, 1.0, 60.0)
            .unwrap()
            .distribution
            .unwrap()
            .probabilities
    };
    let (pf, pr) = (pdf(&focus), pdf(&random));
    let mut ratios = Vec::new();
    for bin in [5, 10, 15] {
        let r = pf[bin] / pr[bin].max(f64::MIN_POSITIVE);
        ensure!(r >= 3.0, "bin {bin}: focus {:.4} vs random {:.4}", pf[bin], pr[bin]);
        ratios.push(format!("{bin}m {r:.1}x"));
    }

    let trough = |group: &BTreeSet<String>| {
        let h = hour_of_day_pdf(group, &s.corpus, &admit).unwrap();
        let max = h.iter().copied().fold(0.0, f64::max);
        let min = h.iter().copied().fold(1.0, f64::min);
        min / max
    };
    let (tr, tf) = (trough(&random), trough(&focus));
    ensure!(tr < 0.5, "random min/max hour mass {tr:.3}");
    ensure!(tf >= 0.5, "focus min/max hour mass {tf:.3}");
    Ok(format!(
        "{}; hour min/max random {tr:.2}, focus {tf:.2}",
        ratios.join(", ")
    ))
}

fn tree_hashes(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let bytes = std::fs::read(e.path()).unwrap();
            let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            (e.file_name().to_string_lossy().into_owned(), hex)
        })
        .collect()
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_synth(tmp.path(), 10, 200, 8);
    let lexicon = Lexicon::bundled();
    let run = |out: &str| -> Result<BTreeMap<String, String>, String> {
        let cfg = PipelineConfig::for_corpus(vec![tmp.path().join("corpus.jsonl")], tmp.path().join(out), 8);
        Pipeline::new(cfg, &lexicon).run_all().map_err(|e| e.to_string())?;
        Ok(tree_hashes(&tmp.path().join(out)))
    };
    let (a, b) = (run("a")?, run("b")?);
    ensure!(a.len() > 10, "only {} files written", a.len());
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    ensure!(
        a.keys().eq(b.keys()) && differing.is_empty(),
        "differing files: {differing:?}"
    );
    Ok(format!("{} files, identical SHA-256 across runs", a.len()))
}

const SUFFIX_RULES: &str = "\
com
net
org
io
de
jp
uk
co.uk
ac.uk
*.sch.uk
github.io
blogspot.com
*.kawasaki.jp
!city.kawasaki.jp
ck
*.ck
!www.ck
*.bd
";

const SLD_CASES: [(&str, Option<&str>); 50] = [
    ("www.example.com", Some("example.com")),
    ("example.com", Some("example.com")),
    ("com", None),
    ("a.b.c.example.com", Some("example.com")),
    ("https://www.example.com/path?q=1", Some("example.com")),
    ("HTTP://WWW.EXAMPLE.COM", Some("example.com")),
    ("www.example.com:8080", Some("example.com")),
    ("example.com.", Some("example.com")),
    ("ftp://files.example.net/x", Some("example.net")),
    ("mail.example.org", Some("example.org")),
    ("example.co.uk", Some("example.co.uk")),
    ("www.example.co.uk", Some("example.co.uk")),
    ("co.uk", None),
    ("uk", None),
    ("example.uk", Some("example.uk")),
    ("www.ox.ac.uk", Some("ox.ac.uk")),
    ("ac.uk", None),
    ("school.sch.uk", None),
    ("www.school.sch.uk", Some("www.school.sch.uk")),
    ("a.www.school.sch.uk", Some("www.school.sch.uk")),
    ("sch.uk", Some("sch.uk")),
    ("kawasaki.jp", Some("kawasaki.jp")),
    ("foo.kawasaki.jp", None),
    ("bar.foo.kawasaki.jp", Some("bar.foo.kawasaki.jp")),
    ("city.kawasaki.jp", Some("city.kawasaki.jp")),
    ("www.city.kawasaki.jp", Some("city.kawasaki.jp")),
    ("a.b.city.kawasaki.jp", Some("city.kawasaki.jp")),
    ("example.jp", Some("example.jp")),
    ("www.example.jp", Some("example.jp")),
    ("ck", None),
    ("test.ck", None),
    ("b.test.ck", Some("b.test.ck")),
    ("a.b.test.ck", Some("b.test.ck")),
    ("www.ck", Some("www.ck")),
    ("www.www.ck", Some("www.ck")),
    ("github.io", None),
    ("user.github.io", Some("user.github.io")),
    ("www.user.github.io", Some("user.github.io")),
    ("io", None),
    ("example.io", Some("example.io")),
    ("blogspot.com", None),
    ("foo.blogspot.com", Some("foo.blogspot.com")),
    ("bar.foo.blogspot.com", Some("foo.blogspot.com")),
    ("example.unlisted", Some("example.unlisted")),
    ("www.example.unlisted", Some("example.unlisted")),
    ("unlisted", None),
    ("192.168.0.1", None),
    ("http://[::1]/", None),
    ("foo.bd", None),
    ("www.foo.bd", Some("www.foo.bd")),
];

fn sld_extraction() -> Result<String, String> {
    let bundled = SuffixRuleSet::bundled();
    let got = extract_sld("www.example.com", &bundled);
    ensure!(
        got.as_deref() == Some("example.com"),
        "bundled rules: www.example.com -> {got:?}"
    );
    let rules = SuffixRuleSet::parse(SUFFIX_RULES.as_bytes()).map_err(|e| e.to_string())?;
    let wrong: Vec<String> = SLD_CASES
        .iter()
        .filter_map(|(input, want)| {
            let got = extract_sld(input, &rules);
            (got.as_deref() != *want).then(|| format!("{input}: got {got:?}, want {want:?}"))
        })
        .collect();
    ensure!(
        wrong.is_empty(),
        "{} of 50 cases wrong: {}",
        wrong.len(),
        wrong.join("; ")
    );
    Ok("www.example.com -> example.com; 50/50 table cases".into())
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("gini oracle equivalence", gini_oracle),
        ("planted-profile recovery", planted_recovery),
        ("readability formulas", readability_formulas),
        ("jaccard / KL suite", jaccard_kl),
        ("LDA separation", lda_separation),
        ("OLS suite", ols_suite),
        ("temporal regularity discrimination", temporal_discrimination),
        ("determinism", determinism),
        ("SLD extraction", sld_extraction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("acceptance {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
