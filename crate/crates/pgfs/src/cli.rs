//! Command-line parsing. Flags override values from `--config`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "pgfs", version, about = "Forward-synthesis molecule generation with reinforcement learning")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    /// Override any configuration key, e.g. `--set batch=64`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args, Default)]
pub struct CorpusArgs {
    /// Building-block file (`SMILES[<TAB>id]` per line).
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Reaction-template file.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the block index and write its artifacts and a report.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Train the agent.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// qed, plogp, heavy_atoms or external:<command>.
        #[arg(long)]
        scorer: Option<String>,
        /// Total environment steps.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Second-reactant candidates per step.
        #[arg(long)]
        k: Option<usize>,
        /// Where to write the checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Held-out starts for periodic greedy evaluation.
        #[arg(long)]
        starts: Option<PathBuf>,
    },
    /// Greedy inference from a trained checkpoint.
    Sample {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        scorer: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Start molecules; otherwise `--count` starts are drawn at random.
        #[arg(long)]
        starts: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Random-search baseline with a reaction budget.
    Random {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        scorer: Option<String>,
        /// Total reactions to apply.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        starts: Option<PathBuf>,
    },
    /// Score a file of SMILES.
    Score {
        /// One SMILES per line.
        input: PathBuf,
        #[arg(long)]
        scorer: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Training SMILES for an applicability-domain flag column.
        #[arg(long)]
        ad: Option<PathBuf>,
        #[arg(long)]
        blocks: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
}

fn put<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn put_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn apply_corpus(cfg: &mut RunConfig, c: CorpusArgs) {
    put_opt(&mut cfg.blocks, c.blocks);
    put_opt(&mut cfg.templates, c.templates);
    put(&mut cfg.out, c.out);
}

/// Folds flags into the configuration, returning what is left of the command.
pub fn effective_config(cli: &mut Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v)?;
    }
    let Some(cmd) = cli.command.as_mut() else {
        return Ok(cfg);
    };
    match cmd {
        Command::Ingest { corpus } => apply_corpus(&mut cfg, std::mem::take(corpus)),
        Command::Train {
            corpus,
            scorer,
            steps,
            seed,
            k,
            checkpoint,
            starts,
            ..
        } => {
            apply_corpus(&mut cfg, std::mem::take(corpus));
            put(&mut cfg.scorer, scorer.take());
            put(&mut cfg.steps, steps.take());
            put(&mut cfg.seed, seed.take());
            put(&mut cfg.k, k.take());
            put_opt(&mut cfg.checkpoint, checkpoint.take());
            put_opt(&mut cfg.starts, starts.take());
        }
        Command::Sample {
            corpus,
            scorer,
            seed,
            k,
            checkpoint,
            starts,
            count,
        } => {
            apply_corpus(&mut cfg, std::mem::take(corpus));
            put(&mut cfg.scorer, scorer.take());
            put(&mut cfg.seed, seed.take());
            put(&mut cfg.k, k.take());
            put_opt(&mut cfg.checkpoint, checkpoint.take());
            put_opt(&mut cfg.starts, starts.take());
            put(&mut cfg.count, count.take());
        }
        Command::Random {
            corpus,
            scorer,
            budget,
            seed,
            k,
            starts,
        } => {
            apply_corpus(&mut cfg, std::mem::take(corpus));
            put(&mut cfg.scorer, scorer.take());
            put_opt(&mut cfg.budget, budget.take());
            put(&mut cfg.seed, seed.take());
            put(&mut cfg.k, k.take());
            put_opt(&mut cfg.starts, starts.take());
        }
        Command::Score {
            scorer,
            out,
            blocks,
            templates,
            ..
        } => {
            put(&mut cfg.scorer, scorer.take());
            put(&mut cfg.out, out.take());
            put_opt(&mut cfg.blocks, blocks.take());
            put_opt(&mut cfg.templates, templates.take());
        }
    }
    Ok(cfg)
}

pub fn run(mut cli: Cli) -> Result<()> {
    let cfg = effective_config(&mut cli)?;
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let cmd = cli
        .command
        .ok_or_else(|| Error::usage("no command given (try --help)"))?;
    cfg.validate()?;
    match cmd {
        Command::Ingest { .. } => {
            commands::ingest(&cfg)?;
        }
        Command::Train { resume, .. } => {
            let s = commands::train(&cfg, resume.as_deref())?;
            println!(
                "trained to step {} ({} episodes, {} skipped); checkpoint {}",
                s.steps,
                s.episodes,
                s.skipped,
                s.checkpoint.display()
            );
            if let Some(r) = s.last_inference_reward {
                println!("mean inference reward {r:.4}");
            }
        }
        Command::Sample { .. } => {
            let ckpt = cfg
                .checkpoint
                .clone()
                .ok_or_else(|| Error::usage("sample needs --checkpoint"))?;
            let eps = commands::sample(&cfg, &ckpt)?;
            println!("{} episodes written to {}", eps.len(), cfg.out.display());
        }
        Command::Random { .. } => {
            let eps = commands::random(&cfg)?;
            let n: usize = eps.iter().map(|e| e.steps.len()).sum();
            println!("{} episodes, {n} reactions written to {}", eps.len(), cfg.out.display());
        }
        Command::Score { input, ad, .. } => {
            let s = commands::score(&cfg, &input, ad.as_deref())?;
            for e in &s.errors {
                eprintln!("{}: {e}", input.display());
            }
            if !s.errors.is_empty() {
                return Err(Error::data(format!("{} unparseable line(s)", s.errors.len())));
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Error::usage("").exit_code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
