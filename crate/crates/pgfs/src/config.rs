//! Run configuration as flat `key = value` text.
//!
//! Blank lines and `#` comments are ignored. An empty value leaves an
//! optional setting unset. Lists are comma separated. Command-line flags are
//! applied on top of a loaded file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pgfs_core::agent::TrainConfig;
use pgfs_core::env::EnvConfig;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub blocks: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub out: PathBuf,
    /// `qed`, `plogp` or `external:<command>`.
    pub scorer: String,
    pub steps: usize,
    pub budget: Option<usize>,
    pub seed: u64,
    pub k: usize,
    pub max_steps: usize,
    pub min_compat: Option<usize>,
    pub floor: Option<f64>,
    pub checkpoint: Option<PathBuf>,
    pub starts: Option<PathBuf>,
    /// Number of sampled starts when no starts file is given.
    pub count: usize,
    /// Starts held out of training for periodic greedy evaluation.
    pub eval_starts: usize,
    pub eval_every: usize,
    pub checkpoint_every: usize,
    pub scorer_timeout_secs: u64,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        RunConfig {
            blocks: None,
            templates: None,
            out: PathBuf::from("pgfs-out"),
            scorer: String::from("qed"),
            steps: train.total_steps,
            budget: None,
            seed: train.seed,
            k: 1,
            max_steps: 5,
            min_compat: None,
            floor: None,
            checkpoint: None,
            starts: None,
            count: 100,
            eval_starts: 20,
            eval_every: 1000,
            checkpoint_every: 5000,
            scorer_timeout_secs: 30,
            train,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::usage(format!("config key '{key}': cannot parse '{v}'")))
}

fn opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v.is_empty() {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

fn list(key: &str, v: &str) -> Result<Vec<usize>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse(key, x.trim())).collect()
}

fn show<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn show_path(v: &Option<PathBuf>) -> String {
    v.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

fn show_list(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let t = &mut self.train;
        match key {
            "blocks" => self.blocks = opt(key, v)?,
            "templates" => self.templates = opt(key, v)?,
            "out" => self.out = parse(key, v)?,
            "scorer" => self.scorer = String::from(v),
            "steps" => self.steps = parse(key, v)?,
            "budget" => self.budget = opt(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "k" => self.k = parse(key, v)?,
            "max_steps" => self.max_steps = parse(key, v)?,
            "min_compat" => self.min_compat = opt(key, v)?,
            "floor" => self.floor = opt(key, v)?,
            "checkpoint" => self.checkpoint = opt(key, v)?,
            "starts" => self.starts = opt(key, v)?,
            "count" => self.count = parse(key, v)?,
            "eval_starts" => self.eval_starts = parse(key, v)?,
            "eval_every" => self.eval_every = parse(key, v)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, v)?,
            "scorer_timeout_secs" => self.scorer_timeout_secs = parse(key, v)?,
            "gamma" => t.gamma = parse(key, v)?,
            "batch" => t.batch = parse(key, v)?,
            "lr_actor" => t.lr_actor = parse(key, v)?,
            "lr_critic" => t.lr_critic = parse(key, v)?,
            "polyak_tau" => t.polyak_tau = parse(key, v)?,
            "explore_sigma" => t.explore_sigma = parse(key, v)?,
            "policy_noise" => t.policy_noise = parse(key, v)?,
            "noise_clip" => t.noise_clip = parse(key, v)?,
            "actor_delay" => t.actor_delay = parse(key, v)?,
            "bootstrap_steps" => t.bootstrap_steps = parse(key, v)?,
            "buffer_capacity" => t.buffer_capacity = parse(key, v)?,
            "gumbel_tau_start" => t.gumbel_tau_start = parse(key, v)?,
            "gumbel_tau_end" => t.gumbel_tau_end = parse(key, v)?,
            "anneal_fraction" => t.anneal_fraction = parse(key, v)?,
            "f_hidden" => t.f_hidden = list(key, v)?,
            "pi_hidden" => t.pi_hidden = list(key, v)?,
            "q_hidden" => t.q_hidden = list(key, v)?,
            "project_targets" => t.project_targets = parse(key, v)?,
            _ => return Err(Error::usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        vec![
            ("blocks", show_path(&self.blocks)),
            ("templates", show_path(&self.templates)),
            ("out", self.out.display().to_string()),
            ("scorer", self.scorer.clone()),
            ("steps", self.steps.to_string()),
            ("budget", show(&self.budget)),
            ("seed", self.seed.to_string()),
            ("k", self.k.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("min_compat", show(&self.min_compat)),
            ("floor", show(&self.floor)),
            ("checkpoint", show_path(&self.checkpoint)),
            ("starts", show_path(&self.starts)),
            ("count", self.count.to_string()),
            ("eval_starts", self.eval_starts.to_string()),
            ("eval_every", self.eval_every.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("scorer_timeout_secs", self.scorer_timeout_secs.to_string()),
            ("gamma", t.gamma.to_string()),
            ("batch", t.batch.to_string()),
            ("lr_actor", t.lr_actor.to_string()),
            ("lr_critic", t.lr_critic.to_string()),
            ("polyak_tau", t.polyak_tau.to_string()),
            ("explore_sigma", t.explore_sigma.to_string()),
            ("policy_noise", t.policy_noise.to_string()),
            ("noise_clip", t.noise_clip.to_string()),
            ("actor_delay", t.actor_delay.to_string()),
            ("bootstrap_steps", t.bootstrap_steps.to_string()),
            ("buffer_capacity", t.buffer_capacity.to_string()),
            ("gumbel_tau_start", t.gumbel_tau_start.to_string()),
            ("gumbel_tau_end", t.gumbel_tau_end.to_string()),
            ("anneal_fraction", t.anneal_fraction.to_string()),
            ("f_hidden", show_list(&t.f_hidden)),
            ("pi_hidden", show_list(&t.pi_hidden)),
            ("q_hidden", show_list(&t.q_hidden)),
            ("project_targets", t.project_targets.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            if v.is_empty() {
                let _ = writeln!(out, "{k} =");
            } else {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("config line {}: expected 'key = value'", n + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| Error::usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::usage(format!("{}: {e}", path.display())))?;
        let mut c = RunConfig::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// The learner settings with `steps` and `seed` folded in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            total_steps: self.steps,
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            max_steps: self.max_steps,
            k: self.k,
            floor: self.floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::usage("k must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(Error::usage("max_steps must be at least 1"));
        }
        if self.scorer.strip_prefix("external:").is_some_and(|c| c.trim().is_empty()) {
            return Err(Error::usage("external scorer needs a command"));
        }
        self.train_config().validate().map_err(Error::usage)
    }
}
