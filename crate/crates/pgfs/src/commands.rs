//! The work behind each subcommand, independent of argument parsing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use pgfs_core::agent::{greedy_episode, CheckpointMeta, StepEvent, TrainObserver, Trainer};
use pgfs_core::env::{random_search, EnvError, EnvRng, EpisodeRecord, StepRecord, SynthEnv};
use pgfs_core::featurize::{descriptor_vector, Descriptor, NormStats};
use pgfs_core::molgraph::{parse_smiles, write_smiles, Molecule};
use pgfs_core::scoring::{
    AdModel, FragmentTable, HeavyAtomScorer, PlogpScorer, QedScorer, ScoreInput, Scorer, BOUNDED_FLOOR,
};

use crate::blocks::{self, rejects_text};
use crate::config::RunConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::external::ExternalScorer;
use crate::output::{self, num, opt_num, CsvOut};
use crate::persist;

pub type DynEnv = SynthEnv<Box<dyn Scorer>>;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::runtime(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::runtime(format!("{}: {e}", path.display())))
}

/// Builds the configured scorer. `corpus` supplies the molecules for the
/// accessibility table when the penalized logP scorer is selected.
pub fn make_scorer(cfg: &RunConfig, corpus: impl FnOnce() -> Result<Vec<Molecule>>) -> Result<Box<dyn Scorer>> {
    if let Some(cmd) = cfg.scorer.strip_prefix("external:") {
        let floor = cfg.floor.unwrap_or(BOUNDED_FLOOR);
        let s = ExternalScorer::spawn(cmd.trim(), floor)
            .map_err(|e| Error::runtime(format!("starting scorer '{cmd}': {e}")))?
            .with_timeout(Duration::from_secs(cfg.scorer_timeout_secs));
        return Ok(Box::new(s));
    }
    match cfg.scorer.as_str() {
        "qed" => Ok(Box::new(QedScorer::new())),
        "plogp" => {
            let table = FragmentTable::build(&corpus()?).map_err(|e| Error::data(format!("accessibility table: {e}")))?;
            Ok(Box::new(PlogpScorer::new(table)))
        }
        "heavy_atoms" => Ok(Box::new(HeavyAtomScorer)),
        other => Err(Error::usage(format!(
            "unknown scorer '{other}' (expected qed, plogp, heavy_atoms or external:<command>)"
        ))),
    }
}

fn corpus_molecules(corpus: &Corpus) -> Vec<Molecule> {
    corpus.index.blocks().iter().map(|b| b.molecule.clone()).collect()
}

pub fn load_env(cfg: &RunConfig) -> Result<(Corpus, DynEnv)> {
    let corpus = Corpus::load(cfg.blocks.as_deref(), cfg.templates.as_deref(), cfg.min_compat)?;
    let scorer = make_scorer(cfg, || Ok(corpus_molecules(&corpus)))?;
    let env = SynthEnv::new(corpus.index.clone(), scorer, cfg.env_config());
    Ok((corpus, env))
}

/// Reads a starts file (one SMILES per line) and maps each entry to a valid
/// start block. All bad lines are reported together.
pub fn read_starts(path: &Path, env: &DynEnv) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let index = env.index();
    let mut found = Vec::new();
    let mut problems = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let smiles = line.split('\t').next().unwrap_or(line);
        let m = match parse_smiles(smiles) {
            Ok(m) => m,
            Err(e) => {
                let _ = writeln!(problems, "  line {}: {smiles}: {e}", n + 1);
                continue;
            }
        };
        match index.block_by_smiles(&write_smiles(&m)) {
            None => {
                let _ = writeln!(problems, "  line {}: {smiles}: not a building block of this corpus", n + 1);
            }
            Some(i) if index.starts().binary_search(&i).is_err() => {
                let _ = writeln!(problems, "  line {}: {smiles}: no template applies", n + 1);
            }
            Some(i) => found.push(i),
        }
    }
    if !problems.is_empty() {
        return Err(Error::data(format!("{}:\n{}", path.display(), problems.trim_end())));
    }
    if found.is_empty() {
        return Err(Error::data(format!("{}: no starts", path.display())));
    }
    Ok(found)
}

fn parse_index_list(s: &str) -> Option<Vec<usize>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.parse().ok()).collect()
}

fn index_list(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub blocks_kept: usize,
    pub rejected: usize,
    pub duplicates: usize,
    pub templates_retained: usize,
    pub templates_dropped: usize,
}

pub fn ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    let corpus = Corpus::load(cfg.blocks.as_deref(), cfg.templates.as_deref(), cfg.min_compat)?;
    let out = &cfg.out;
    create_dir(out)?;
    let index = &corpus.index;

    let mut text = String::from("# index\tsmiles\tidentifier\n");
    for (i, b) in index.blocks().iter().enumerate() {
        let id = corpus.ids.get(&b.smiles).map(String::as_str).unwrap_or("");
        let _ = writeln!(text, "{i}\t{}\t{id}", b.smiles);
    }
    write_file(&out.join("blocks.canonical.smi"), &text)?;

    let mut text = String::from("# retained templates\n");
    for t in index.templates() {
        let _ = writeln!(text, "{}", t.to_line());
    }
    write_file(&out.join("templates.retained.tsv"), &text)?;

    let mut text = String::from("# template\tcompatible\tblock indices\n");
    for (t, tm) in index.templates().iter().enumerate() {
        let _ = writeln!(text, "{}\t{}\t{}", tm.name, index.compat(t).len(), index_list(index.compat(t)));
    }
    write_file(&out.join("compat.tsv"), &text)?;

    let mut text = String::from("# block\tstart\tvalid templates\n");
    for (i, _) in index.blocks().iter().enumerate() {
        let valid: Vec<&str> = index
            .block_mask(i)
            .iter()
            .zip(index.templates())
            .filter(|(m, _)| **m)
            .map(|(_, t)| t.name.as_str())
            .collect();
        let start = index.starts().binary_search(&i).is_ok() as u8;
        let _ = writeln!(text, "{i}\t{start}\t{}", valid.join(","));
    }
    write_file(&out.join("masks.tsv"), &text)?;

    write_file(&out.join("norm.tsv"), &index.norm().to_text())?;
    let table = FragmentTable::build(&corpus_molecules(&corpus)).map_err(|e| Error::data(format!("accessibility table: {e}")))?;
    write_file(&out.join("sa_fragments.tsv"), &table.to_text())?;
    let sidecar = match &corpus.blocks_source {
        crate::corpus::Source::File(p) => blocks::rejects_path(p, out),
        crate::corpus::Source::Bundled => out.join("blocks.rejects"),
    };
    write_file(&sidecar, &rejects_text(&corpus.rejects))?;

    let r = &corpus.report;
    let mut report = String::new();
    let _ = writeln!(report, "blocks source: {}", corpus.blocks_source);
    let _ = writeln!(report, "templates source: {}", corpus.templates_source);
    let _ = writeln!(report, "blocks read: {}", r.blocks_in + corpus.rejects.len());
    let _ = writeln!(report, "blocks rejected: {}", corpus.rejects.len());
    for rej in &corpus.rejects {
        let _ = writeln!(report, "  line {} {}: {}", rej.line, rej.code, rej.detail);
    }
    let _ = writeln!(report, "duplicates merged: {}", r.duplicates);
    let _ = writeln!(report, "blocks kept: {}", index.blocks().len());
    let _ = writeln!(report, "valid starts: {}", index.starts().len());
    let _ = writeln!(report, "templates retained: {}", r.retained.len());
    for (name, n) in &r.retained {
        let _ = writeln!(report, "  {name}\t{n}");
    }
    let _ = writeln!(report, "templates dropped: {}", r.dropped.len());
    for (name, why) in &r.dropped {
        let pgfs_core::env::DropReason::TooFewReactants { compatible, required } = why;
        let _ = writeln!(report, "  {name}\ttoo few second reactants ({compatible} < {required})");
    }
    let _ = writeln!(report, "corpus hash: {}", index.corpus_hash());
    write_file(&out.join("ingest_report.txt"), &report)?;
    print!("{report}");

    Ok(IngestSummary {
        blocks_kept: index.blocks().len(),
        rejected: corpus.rejects.len(),
        duplicates: r.duplicates,
        templates_retained: r.retained.len(),
        templates_dropped: r.dropped.len(),
    })
}

// ---------------------------------------------------------------- train

struct CsvObserver<'a> {
    episodes: &'a mut CsvOut,
    error: Option<Error>,
    skipped: Vec<String>,
}

impl TrainObserver<StepRecord> for CsvObserver<'_> {
    fn on_step(&mut self, e: &StepEvent<'_, StepRecord>) {
        if self.error.is_none() {
            if let Err(err) = self.episodes.row(output::episode_row(e.episode, e.episode_step + 1, e.info)) {
                self.error = Some(err);
            }
        }
    }

    fn on_skip(&mut self, step: usize, error: &EnvError) {
        self.skipped.push(format!("step {step}: {error}"));
    }
}

/// Greedy episodes from each of `starts`, as episode records.
pub fn greedy_records(
    trainer: &Trainer<pgfs_core::env::SynthState>,
    env: &mut DynEnv,
    starts: &[usize],
    seed: u64,
) -> Result<Vec<EpisodeRecord>> {
    let mut rng = EnvRng::seed_from_u64(seed);
    let tau = trainer.tau();
    let mut out = Vec::with_capacity(starts.len());
    for &s in starts {
        let s0 = env.start_state(s);
        let steps = greedy_episode(&trainer.agent, env, s0, tau, &mut rng)
            .map_err(|e| Error::runtime(format!("inference: {e}")))?;
        out.push(EpisodeRecord {
            steps: steps.into_iter().map(|(_, info, _)| info).collect(),
        });
    }
    Ok(out)
}

fn mean_max_reward(episodes: &[EpisodeRecord]) -> Option<f64> {
    let v: Vec<f64> = episodes.iter().filter_map(|e| e.max_reward()).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub steps: usize,
    pub episodes: usize,
    pub skipped: usize,
    pub checkpoint: PathBuf,
    pub last_inference_reward: Option<f64>,
}

/// Runs (or resumes) training up to `cfg.steps` environment steps.
pub fn train(cfg: &RunConfig, resume: Option<&Path>) -> Result<TrainSummary> {
    cfg.validate()?;
    let (corpus, mut env) = load_env(cfg)?;
    create_dir(&cfg.out)?;
    let ckpt_path = cfg.checkpoint.clone().unwrap_or_else(|| cfg.out.join("checkpoint.pgfs"));
    let corpus_hash = corpus.index.corpus_hash().to_string();

    let (mut trainer, held) = match resume {
        Some(path) => {
            let (trainer, meta) = persist::load(path, &env, &corpus_hash)?;
            let held = persist::meta_value(&meta, "eval_starts")
                .and_then(parse_index_list)
                .ok_or_else(|| Error::data(format!("{}: missing eval_starts entry", path.display())))?;
            (trainer, held)
        }
        None => {
            let held = match &cfg.starts {
                Some(p) => read_starts(p, &env)?,
                None => {
                    let mut all = env.index().starts().to_vec();
                    all.shuffle(&mut EnvRng::seed_from_u64(cfg.seed ^ 0x5eed_e7a1));
                    let n = cfg.eval_starts.min(all.len() / 5);
                    let mut held = all[..n].to_vec();
                    held.sort_unstable();
                    held
                }
            };
            let trainer = Trainer::new(cfg.train_config(), &env).map_err(|e| Error::usage(e.to_string()))?;
            (trainer, held)
        }
    };
    let pool: Vec<usize> = env
        .index()
        .starts()
        .iter()
        .copied()
        .filter(|i| held.binary_search(i).is_err())
        .collect();
    if !pool.is_empty() && !held.is_empty() {
        env.set_start_pool(pool).map_err(|e| Error::data(e.to_string()))?;
    }
    if trainer.config.total_steps != cfg.steps {
        trainer.config.total_steps = cfg.steps;
    }

    let meta = CheckpointMeta {
        corpus_hash,
        extra: vec![
            (String::from("scorer"), cfg.scorer.clone()),
            (String::from("k"), cfg.k.to_string()),
            (String::from("max_steps"), cfg.max_steps.to_string()),
            (String::from("eval_starts"), index_list(&held)),
        ],
        norm: Some(env.index().norm().clone()),
    };

    let episodes_path = cfg.out.join("episodes.csv");
    let metrics_path = cfg.out.join("metrics.csv");
    let (mut episodes, mut metrics) = if resume.is_some() {
        (
            CsvOut::append(&episodes_path, output::EPISODE_SCHEMA, &output::EPISODE_HEADER)?,
            CsvOut::append(&metrics_path, output::METRICS_SCHEMA, &output::METRICS_HEADER)?,
        )
    } else {
        (
            CsvOut::create(&episodes_path, output::EPISODE_SCHEMA, &output::EPISODE_HEADER)?,
            CsvOut::create(&metrics_path, output::METRICS_SCHEMA, &output::METRICS_HEADER)?,
        )
    };

    let every = |n: usize| if n == 0 { usize::MAX } else { n };
    let (eval_every, ckpt_every) = (every(cfg.eval_every), every(cfg.checkpoint_every));
    let mut last_inference = None;
    let mut skipped_log = Vec::new();
    while trainer.step < cfg.steps {
        let step = trainer.step;
        let next_eval = (step / eval_every + 1).saturating_mul(eval_every);
        let next_ckpt = (step / ckpt_every + 1).saturating_mul(ckpt_every);
        let until = next_eval.min(next_ckpt).min(cfg.steps);
        let mut obs = CsvObserver {
            episodes: &mut episodes,
            error: None,
            skipped: Vec::new(),
        };
        trainer
            .run(&mut env, until - step, &mut obs)
            .map_err(|e| Error::runtime(format!("training step {}: {e}", trainer.step)))?;
        if let Some(e) = obs.error {
            return Err(e);
        }
        skipped_log.extend(obs.skipped);
        let at_end = trainer.step == cfg.steps;
        if trainer.step % eval_every == 0 || at_end {
            let losses = trainer.take_losses();
            let eval = if held.is_empty() {
                None
            } else {
                mean_max_reward(&greedy_records(&trainer, &mut env, &held, cfg.seed.wrapping_add(trainer.step as u64))?)
            };
            last_inference = eval;
            metrics.row([
                trainer.step.to_string(),
                opt_num(losses.critic),
                opt_num(losses.actor),
                opt_num(losses.f_ce),
                opt_num(eval),
            ])?;
            metrics.flush()?;
        }
        episodes.flush()?;
        if trainer.step % ckpt_every == 0 || at_end {
            persist::save(&ckpt_path, &trainer, &env, &meta)?;
        }
    }
    if !skipped_log.is_empty() {
        let mut text = skipped_log.join("\n");
        text.push('\n');
        write_file(&cfg.out.join("skipped.txt"), &text)?;
    }
    Ok(TrainSummary {
        steps: trainer.step,
        episodes: trainer.episode,
        skipped: trainer.skipped,
        checkpoint: ckpt_path,
        last_inference_reward: last_inference,
    })
}

// ---------------------------------------------------------------- sample / random

fn write_run(out: &Path, prefix: &str, episodes: &[EpisodeRecord]) -> Result<()> {
    let mut csv = CsvOut::create(
        &out.join(format!("{prefix}_episodes.csv")),
        output::EPISODE_SCHEMA,
        &output::EPISODE_HEADER,
    )?;
    output::write_episodes(&mut csv, 0, episodes)?;
    csv.flush()?;
    output::write_quantiles(&out.join(format!("{prefix}_quantiles.csv")), episodes)?;
    output::write_summary(&out.join(format!("{prefix}_summary.csv")), episodes)?;
    write_file(&out.join(format!("{prefix}_routes.txt")), &output::routes_text(episodes))
}

fn chosen_starts(cfg: &RunConfig, env: &DynEnv) -> Result<Vec<usize>> {
    match &cfg.starts {
        Some(p) => read_starts(p, env),
        None => {
            let all = env.index().starts();
            let mut rng = EnvRng::seed_from_u64(cfg.seed);
            Ok((0..cfg.count)
                .map(|_| all[rand::Rng::random_range(&mut rng, 0..all.len())])
                .collect())
        }
    }
}

pub fn sample(cfg: &RunConfig, checkpoint: &Path) -> Result<Vec<EpisodeRecord>> {
    let (corpus, mut env) = load_env(cfg)?;
    let (trainer, _) = persist::load(checkpoint, &env, corpus.index.corpus_hash())?;
    let starts = chosen_starts(cfg, &env)?;
    let episodes = greedy_records(&trainer, &mut env, &starts, cfg.seed)?;
    create_dir(&cfg.out)?;
    write_run(&cfg.out, "sample", &episodes)?;
    Ok(episodes)
}

pub fn random(cfg: &RunConfig) -> Result<Vec<EpisodeRecord>> {
    let budget = cfg.budget.ok_or_else(|| Error::usage("random search needs --budget"))?;
    let (_corpus, mut env) = load_env(cfg)?;
    let starts = match &cfg.starts {
        Some(p) => Some(read_starts(p, &env)?),
        None => None,
    };
    let mut rng = EnvRng::seed_from_u64(cfg.seed);
    let episodes = random_search(&mut env, budget, starts.as_deref(), &mut rng)
        .map_err(|e| Error::runtime(format!("random search: {e}")))?;
    create_dir(&cfg.out)?;
    write_run(&cfg.out, "random", &episodes)?;
    Ok(episodes)
}

// ---------------------------------------------------------------- score

fn parse_molecule_file(path: &Path) -> Result<(Vec<(usize, Molecule)>, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let smiles = line.split('\t').next().unwrap_or(line);
        match parse_smiles(smiles) {
            Ok(m) => ok.push((n + 1, m)),
            Err(e) => bad.push(format!("line {}: {smiles}: {e}", n + 1)),
        }
    }
    Ok((ok, bad))
}

fn fit_ad(path: &Path) -> Result<(NormStats, AdModel)> {
    let (mols, bad) = parse_molecule_file(path)?;
    if !bad.is_empty() {
        return Err(Error::data(format!("{}:\n  {}", path.display(), bad.join("\n  "))));
    }
    let raw: Vec<Vec<f64>> = mols.iter().map(|(_, m)| descriptor_vector(m)).collect();
    let names: Vec<&str> = Descriptor::ALL.iter().map(|d| d.name()).collect();
    let norm = NormStats::fit(&names, &raw).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = raw.iter().map(|r| norm.normalize(r)).collect();
    let model = AdModel::fit(rows).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    Ok((norm, model))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSummary {
    pub scored: usize,
    pub errors: Vec<String>,
}

/// Scores every SMILES line of `input` into `<out>/scores.csv`.
pub fn score(cfg: &RunConfig, input: &Path, ad: Option<&Path>) -> Result<ScoreSummary> {
    let (mols, errors) = parse_molecule_file(input)?;
    let mut scorer = make_scorer(cfg, || {
        let corpus = Corpus::load(cfg.blocks.as_deref(), cfg.templates.as_deref(), cfg.min_compat)?;
        Ok(corpus_molecules(&corpus))
    })?;
    let ad = ad.map(fit_ad).transpose()?;
    let smiles: Vec<String> = mols.iter().map(|(_, m)| write_smiles(m)).collect();
    let inputs: Vec<ScoreInput<'_>> = mols
        .iter()
        .zip(&smiles)
        .map(|((_, m), s)| ScoreInput { molecule: m, smiles: s })
        .collect();
    let scores = scorer
        .score_batch(&inputs)
        .map_err(|e| Error::runtime(format!("scoring: {e}")))?;

    create_dir(&cfg.out)?;
    let mut header = vec!["line", "smiles", "score"];
    if ad.is_some() {
        header.push("ad_inside");
    }
    let mut csv = CsvOut::create(&cfg.out.join("scores.csv"), output::SCORE_SCHEMA, &header)?;
    for (((line, m), s), v) in mols.iter().zip(&smiles).zip(&scores) {
        let mut row = vec![line.to_string(), s.clone(), v.map(num).unwrap_or_default()];
        if let Some((norm, model)) = &ad {
            let x = norm.normalize(&descriptor_vector(m));
            row.push((model.inside(&x) as u8).to_string());
        }
        csv.row(row)?;
    }
    csv.flush()?;
    Ok(ScoreSummary {
        scored: mols.len(),
        errors,
    })
}
