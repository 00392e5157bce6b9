use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_consistox"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("pipeline.toml");
    std::fs::write(
        &path,
        format!("seed = 3\noutput_dir = \"out\"\n{extra}\n[inputs]\ncorpus = [\"corpus.jsonl\"]\n"),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

fn synth(dir: &Path) {
    let corpus = dir.join("corpus.jsonl");
    let planted = dir.join("planted.txt");
    let out = run(&[
        "synth",
        "--n-focus",
        "3",
        "--n-random",
        "40",
        "--seed",
        "1",
        "--output",
        corpus.to_str().unwrap(),
        "--planted",
        planted.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ingest_succeeds_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = write_config(tmp.path(), "");
    let out = run(&["ingest", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("out/ingest_report.json").is_file());
    assert!(tmp.path().join("out/manifest.json").is_file());
}

#[test]
fn missing_input_exits_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = run(&["ingest", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("corpus.jsonl"), "{err}");
}

#[test]
fn bad_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = write_config(tmp.path(), "[thresholds]\nmedian = 3.0\n");
    assert_eq!(run(&["run-all", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(tmp.path(), "");
    let out = run(&["select", "--config", &cfg, "--dimension", "rudeness"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_malformed_line_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("corpus.jsonl"), "{\"tweet_id\": 1}\n").unwrap();
    let cfg = write_config(tmp.path(), "strict = true");
    let out = run(&["ingest", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn run_all_with_overrides_selects_planted() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = write_config(tmp.path(), "");
    let out = run(&[
        "run-all",
        "--config",
        &cfg,
        "--dimension",
        "threat",
        "--seed",
        "11",
        "--output-dir",
    ])
    .status
    .code();
    // --output-dir needs a value
    assert_eq!(out, Some(2));
    let dest = tmp.path().join("elsewhere");
    let out = run(&[
        "run-all",
        "--config",
        &cfg,
        "--dimension",
        "threat",
        "--seed",
        "11",
        "--output-dir",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let select = std::fs::read_to_string(dest.join("select_threat.csv")).unwrap();
    assert!(select.lines().next().unwrap().contains("seed=11"));
    let planted = std::fs::read_to_string(tmp.path().join("planted.txt")).unwrap();
    let mut chosen: Vec<&str> = select
        .lines()
        .filter(|l| l.ends_with(",focus"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    chosen.sort();
    assert_eq!(chosen, planted.lines().collect::<Vec<_>>());
    assert!(!dest.join("select_insult.csv").exists());
}

#[test]
fn synth_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.jsonl");
    let b = tmp.path().join("b.jsonl");
    for p in [&a, &b] {
        let out = run(&[
            "synth",
            "--n-focus",
            "5",
            "--n-random",
            "50",
            "--seed",
            "4",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let profiles: std::collections::BTreeSet<String> = text
        .lines()
        .map(|l| {
            l.split("\"profile_id\":\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(profiles.len(), 55);
}
