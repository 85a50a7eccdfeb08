use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BLOCKS: &str = include_str!("../../core/data/blocks.smi");

/// Small networks keep the training commands fast.
const SMALL: [&str; 10] = [
    "--set", "f_hidden=32", "--set", "pi_hidden=32", "--set", "q_hidden=32,16", "--set", "batch=16", "--set",
    "bootstrap_steps=100",
];

fn pgfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgfs")).args(args).output().expect("run pgfs")
}

fn ok(args: &[&str]) -> Output {
    let o = pgfs(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Data rows of a CSV written by the tool (schema line and header skipped).
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| format!("{l}\n")).collect();
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn ingest_reports_rejects_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from(BLOCKS);
    text.push_str("C1CC(\tBAD01\n");
    let bad_line = text.lines().count();
    let blocks = write(dir.path(), "mine.smi", &text);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    ok(&["ingest", "--blocks", s(&blocks), "--out", s(&out1)]);
    ok(&["ingest", "--blocks", s(&blocks), "--out", s(&out2)]);

    let rejects = fs::read_to_string(out1.join("mine.rejects")).unwrap();
    let data: Vec<&str> = rejects.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 1);
    assert!(data[0].starts_with(&format!("{bad_line}\t")), "{}", data[0]);
    let report = fs::read_to_string(out1.join("ingest_report.txt")).unwrap();
    assert!(report.contains("blocks rejected: 1"));

    for f in ["blocks.canonical.smi", "templates.retained.tsv", "compat.tsv", "masks.tsv", "norm.tsv", "ingest_report.txt"] {
        assert_eq!(fs::read(out1.join(f)).unwrap(), fs::read(out2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn train_then_resume_then_sample() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let mut args = vec!["train", "--steps", "500", "--seed", "5", "--out", s(&out), "--set", "eval_every=250"];
    args.extend(SMALL);
    ok(&args);
    let ckpt = out.join("checkpoint.pgfs");
    assert!(ckpt.exists());
    let metrics = rows(&out.join("metrics.csv"));
    assert_eq!(metrics.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["250", "500"]);
    let first = rows(&out.join("episodes.csv")).len();
    assert_eq!(first, 500 - count_skipped(&out));

    let mut args = vec!["train", "--steps", "700", "--out", s(&out), "--resume", s(&ckpt), "--set", "eval_every=250"];
    args.extend(SMALL);
    let o = ok(&args);
    assert!(String::from_utf8_lossy(&o.stdout).contains("step 700"));
    let metrics = rows(&out.join("metrics.csv"));
    assert_eq!(metrics.last().unwrap()[0], "700");

    let sample = |name: &str| {
        let o = dir.path().join(name);
        ok(&["sample", "--checkpoint", s(&ckpt), "--count", "5", "--seed", "3", "--out", s(&o)]);
        fs::read(o.join("sample_episodes.csv")).unwrap()
    };
    assert_eq!(sample("s1"), sample("s2"));

    let starts = write(dir.path(), "starts.smi", "c1ccc(C(=O)O)cc1\nCCCCCCCCCCCCCCCC\n");
    let o = pgfs(&["sample", "--checkpoint", s(&ckpt), "--starts", s(&starts), "--out", s(&dir.path().join("s3"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

fn count_skipped(out: &Path) -> usize {
    fs::read_to_string(out.join("skipped.txt")).map(|t| t.lines().count()).unwrap_or(0)
}

#[test]
fn budget_is_not_a_train_flag() {
    let o = pgfs(&["train", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pgfs(&["random"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn random_search_is_seeded_and_respects_budget() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, seed: &str| {
        let o = dir.path().join(name);
        ok(&["random", "--budget", "300", "--seed", seed, "--out", s(&o)]);
        o
    };
    let a = run("a", "9");
    let b = run("b", "9");
    let c = run("c", "10");
    let read = |p: &Path| fs::read(p.join("random_episodes.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let reactions = rows(&a.join("random_episodes.csv")).len();
    assert_eq!(reactions, 300);
    for r in rows(&a.join("random_summary.csv")) {
        let steps: usize = r[2].parse().unwrap();
        assert!((1..=5).contains(&steps));
    }
}

#[test]
fn score_command() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "in.smi", "CCO\nc1ccccc1\nCC(=O)Nc1ccc(O)cc1\n");
    let out = dir.path().join("qed");
    ok(&["score", s(&input), "--out", s(&out)]);
    let r = rows(&out.join("scores.csv"));
    assert_eq!(r.iter().map(|x| x[0].as_str()).collect::<Vec<_>>(), ["1", "2", "3"]);
    assert_eq!(r[1][1], "c1ccccc1");
    for x in &r {
        let q: f64 = x[2].parse().unwrap();
        assert!(q > 0.0 && q < 1.0);
    }

    let out = dir.path().join("echo");
    let script = write(dir.path(), "half.sh", "while read line; do echo 0.5; done\n");
    let scorer = format!("external:sh {}", s(&script));
    ok(&["score", s(&input), "--scorer", &scorer, "--out", s(&out)]);
    assert!(rows(&out.join("scores.csv")).iter().all(|x| x[2].parse::<f64>().unwrap() == 0.5));

    let bad = write(dir.path(), "bad.smi", "CCO\nabc\n");
    let o = pgfs(&["score", s(&bad), "--out", s(&dir.path().join("bad"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let empty = write(dir.path(), "empty.smi", "");
    let out = dir.path().join("empty");
    ok(&["score", s(&empty), "--out", s(&out)]);
    assert!(rows(&out.join("scores.csv")).is_empty());

    let ad = dir.path().join("ad");
    let train = write(dir.path(), "train.smi", &BLOCKS.lines().skip(1).take(200).map(|l| format!("{l}\n")).collect::<String>());
    ok(&["score", s(&input), "--ad", s(&train), "--out", s(&ad)]);
    assert!(rows(&ad.join("scores.csv")).iter().all(|x| x[3] == "0" || x[3] == "1"));
}

#[test]
fn print_config_reflects_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.cfg", "batch = 32\nseed = 4\n");
    let o = ok(&["--config", s(&cfg), "--set", "seed=8", "--print-config"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.replace(' ', "") == "batch=32"), "{text}");
    assert!(text.lines().any(|l| l.replace(' ', "") == "seed=8"), "{text}");
    assert_eq!(pgfs(&["--set", "nope=1", "--print-config"]).status.code(), Some(2));
}
