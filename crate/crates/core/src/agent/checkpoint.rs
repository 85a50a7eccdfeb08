//! Self-describing text checkpoints.
//!
//! Layout: the tag line `PGFS-CKPT-1`, the float encoding, the corpus hash,
//! free-form metadata, the training configuration, counters, the random
//! stream position, the in-flight episode, normalization statistics, every
//! network with its optimizer moments, and the replay buffer. The final line
//! carries the SHA-256 of everything above it. Floats in arrays are the
//! 16-digit hex form of their IEEE-754 bits, concatenated.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datafile::sha256_hex;
use crate::env::Environment;
use crate::featurize::{NormStats, SparseVec};

use super::adam::Adam;
use super::buffer::{ReplayBuffer, Transition};
use super::net::{Activation, DenseNet, Grads, Layer};
use super::td3::{Agent, TrainConfig};
use super::train::{LossSums, Trainer};

pub const CHECKPOINT_TAG: &str = "PGFS-CKPT-1";
const ENCODING: &str = "hex-f64-bits";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("unsupported checkpoint version {0:?}")]
    Version(String),
    #[error("checkpoint checksum mismatch")]
    Checksum,
    #[error("checkpoint was written for corpus {found}, current corpus is {expected}")]
    CorpusMismatch { expected: String, found: String },
    #[error("checkpoint line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("saved state {0:?} cannot be restored by this environment")]
    State(String),
}

/// Data stored next to the trainer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckpointMeta {
    pub corpus_hash: String,
    /// Free-form `key value` pairs, e.g. scorer and environment settings.
    pub extra: Vec<(String, String)>,
    pub norm: Option<NormStats>,
}

fn hex_floats(out: &mut String, xs: &[f64]) {
    for x in xs {
        let _ = write!(out, "{:016x}", x.to_bits());
    }
}

fn parse_hex_floats(s: &str) -> Option<Vec<f64>> {
    if s.len() % 16 != 0 || !s.is_ascii() {
        return None;
    }
    (0..s.len() / 16)
        .map(|k| u64::from_str_radix(&s[16 * k..16 * k + 16], 16).ok().map(f64::from_bits))
        .collect()
}

fn f(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn usize_list(xs: &[usize]) -> String {
    if xs.is_empty() {
        return String::from("-");
    }
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn mask_str(m: &[bool]) -> String {
    if m.is_empty() {
        return String::from("-");
    }
    m.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn sparse_str(s: &SparseVec) -> String {
    let mut out = format!("{}:", s.dim);
    out.push_str(&usize_list(&s.idx.iter().map(|&i| i as usize).collect::<Vec<_>>()));
    out.push(':');
    if s.val.is_empty() {
        out.push('-');
    } else {
        hex_floats(&mut out, &s.val);
    }
    out
}

fn config_lines(out: &mut String, c: &TrainConfig) {
    let floats = [
        ("gamma", c.gamma),
        ("lr_actor", c.lr_actor),
        ("lr_critic", c.lr_critic),
        ("polyak_tau", c.polyak_tau),
        ("explore_sigma", c.explore_sigma),
        ("policy_noise", c.policy_noise),
        ("noise_clip", c.noise_clip),
        ("gumbel_tau_start", c.gumbel_tau_start),
        ("gumbel_tau_end", c.gumbel_tau_end),
        ("anneal_fraction", c.anneal_fraction),
    ];
    for (k, v) in floats {
        let _ = writeln!(out, "config {k} {v:?}");
    }
    let ints = [
        ("batch", c.batch),
        ("actor_delay", c.actor_delay),
        ("bootstrap_steps", c.bootstrap_steps),
        ("buffer_capacity", c.buffer_capacity),
        ("total_steps", c.total_steps),
    ];
    for (k, v) in ints {
        let _ = writeln!(out, "config {k} {v}");
    }
    let _ = writeln!(out, "config seed {}", c.seed);
    let _ = writeln!(out, "config f_hidden {}", usize_list(&c.f_hidden));
    let _ = writeln!(out, "config pi_hidden {}", usize_list(&c.pi_hidden));
    let _ = writeln!(out, "config q_hidden {}", usize_list(&c.q_hidden));
    let _ = writeln!(out, "config project_targets {}", c.project_targets);
}

fn net_lines(out: &mut String, name: &str, net: &DenseNet) {
    let _ = writeln!(out, "net {name} {}", net.layers.len());
    for l in &net.layers {
        let _ = write!(out, "layer {} {} {} ", l.n_in, l.n_out, l.act.name());
        hex_floats(out, &l.w);
        out.push(' ');
        hex_floats(out, &l.b);
        out.push('\n');
    }
}

fn grads_lines(out: &mut String, tag: &str, g: &Grads) {
    for (w, b) in g.w.iter().zip(&g.b) {
        let _ = write!(out, "{tag} ");
        hex_floats(out, w);
        out.push(' ');
        hex_floats(out, b);
        out.push('\n');
    }
}

fn adam_lines(out: &mut String, name: &str, a: &Adam) {
    let _ = writeln!(
        out,
        "adam {name} {} {} {} {} {}",
        f(a.lr),
        f(a.beta1),
        f(a.beta2),
        f(a.eps),
        a.t
    );
    grads_lines(out, "m", &a.m);
    grads_lines(out, "v", &a.v);
}

/// Serializes a trainer together with `meta`.
pub fn save_checkpoint<E: Environment>(trainer: &Trainer<E::State>, env: &E, meta: &CheckpointMeta) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_TAG}");
    let _ = writeln!(out, "encoding {ENCODING}");
    let _ = writeln!(out, "corpus {}", meta.corpus_hash);
    for (k, v) in &meta.extra {
        let _ = writeln!(out, "meta {k} {v}");
    }
    config_lines(&mut out, &trainer.config);
    let _ = writeln!(out, "step {}", trainer.step);
    let _ = writeln!(out, "episode {}", trainer.episode);
    let _ = writeln!(out, "skipped {}", trainer.skipped);
    let _ = writeln!(out, "critic_updates {}", trainer.agent.critic_updates);
    let seed = trainer.rng.get_seed();
    let mut seed_hex = String::new();
    for b in seed {
        let _ = write!(seed_hex, "{b:02x}");
    }
    let _ = writeln!(
        out,
        "rng {seed_hex} {} {}",
        trainer.rng.get_stream(),
        trainer.rng.get_word_pos()
    );
    let l = &trainer.losses;
    let _ = writeln!(
        out,
        "losses {} {} {} {} {} {}",
        f(l.critic.0),
        l.critic.1,
        f(l.actor.0),
        l.actor.1,
        f(l.f_ce.0),
        l.f_ce.1
    );
    match &trainer.current {
        Some((s, k)) => {
            let _ = writeln!(out, "current {k} {}", env.state_key(s));
        }
        None => {
            let _ = writeln!(out, "current none");
        }
    }
    if let Some(norm) = &meta.norm {
        for line in norm.to_text().lines().filter(|l| !l.starts_with('#')) {
            let _ = writeln!(out, "norm {line}");
        }
    }
    let a = &trainer.agent;
    for (name, net) in [
        ("f", &a.f),
        ("pi", &a.pi),
        ("q1", &a.q1),
        ("q2", &a.q2),
        ("f_target", &a.f_target),
        ("pi_target", &a.pi_target),
        ("q1_target", &a.q1_target),
        ("q2_target", &a.q2_target),
    ] {
        net_lines(&mut out, name, net);
    }
    for (name, opt) in [("f", &a.opt_f), ("pi", &a.opt_pi), ("q1", &a.opt_q1), ("q2", &a.opt_q2)] {
        adam_lines(&mut out, name, opt);
    }
    let b = &trainer.buffer;
    let _ = writeln!(out, "buffer {} {} {}", b.capacity(), b.len(), b.cursor());
    for t in b.items() {
        let mut action = String::new();
        hex_floats(&mut action, &t.action);
        if action.is_empty() {
            action.push('-');
        }
        let _ = writeln!(
            out,
            "tr {} {} {} {} {} {} {} {}",
            t.template,
            f(t.reward),
            t.done as u8,
            mask_str(&t.mask),
            mask_str(&t.next_mask),
            action,
            sparse_str(&t.state),
            sparse_str(&t.next_state)
        );
    }
    let _ = writeln!(out, "end");
    let digest = sha256_hex(out.as_bytes());
    let _ = writeln!(out, "sha256 {digest}");
    out
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: &str) -> CheckpointError {
        let line = self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0);
        CheckpointError::Malformed {
            line,
            msg: String::from(msg),
        }
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|(_, l)| l.split(' ').next())
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>, CheckpointError> {
        let (_, line) = *self.lines.get(self.pos).ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        let mut fields = line.split(' ');
        if fields.next() != Some(key) {
            return Err(self.err(&format!("expected '{key}'")));
        }
        Ok(fields.collect())
    }

    fn field<T: core::str::FromStr>(&self, fields: &[&str], i: usize) -> Result<T, CheckpointError> {
        fields
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("bad field"))
    }

    fn float(&self, fields: &[&str], i: usize) -> Result<f64, CheckpointError> {
        fields
            .get(i)
            .and_then(|s| parse_hex_floats(s))
            .filter(|v| v.len() == 1)
            .map(|v| v[0])
            .ok_or_else(|| self.err("bad float"))
    }

    fn floats(&self, s: &str, n: usize) -> Result<Vec<f64>, CheckpointError> {
        if s == "-" && n == 0 {
            return Ok(Vec::new());
        }
        parse_hex_floats(s)
            .filter(|v| v.len() == n)
            .ok_or_else(|| self.err("bad float array"))
    }
}

fn parse_usize_list(s: &str) -> Option<Vec<usize>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.parse().ok()).collect()
}

fn parse_mask(s: &str) -> Option<Vec<bool>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '1' => Some(true),
            '0' => Some(false),
            _ => None,
        })
        .collect()
}

fn parse_sparse(s: &str) -> Option<SparseVec> {
    let mut parts = s.split(':');
    let dim = parts.next()?.parse().ok()?;
    let idx: Vec<u32> = parse_usize_list(parts.next()?)?.into_iter().map(|i| i as u32).collect();
    let vals = parts.next()?;
    let val = if vals == "-" { Vec::new() } else { parse_hex_floats(vals)? };
    if parts.next().is_some() || val.len() != idx.len() || idx.iter().any(|&i| i as usize >= dim) {
        return None;
    }
    Some(SparseVec { dim, idx, val })
}

fn read_net(r: &mut Reader<'_>, name: &str) -> Result<DenseNet, CheckpointError> {
    let head = r.expect("net")?;
    if head.first() != Some(&name) {
        return Err(r.err(&format!("expected network {name}")));
    }
    let n: usize = r.field(&head, 1)?;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let fl = r.expect("layer")?;
        let n_in: usize = r.field(&fl, 0)?;
        let n_out: usize = r.field(&fl, 1)?;
        let act = fl
            .get(2)
            .and_then(|s| Activation::from_name(s))
            .ok_or_else(|| r.err("bad activation"))?;
        let w = r.floats(fl.get(3).copied().unwrap_or(""), n_in * n_out)?;
        let b = r.floats(fl.get(4).copied().unwrap_or(""), n_out)?;
        layers.push(Layer { n_in, n_out, w, b, act });
    }
    Ok(DenseNet { layers })
}

fn read_grads(r: &mut Reader<'_>, tag: &str, like: &DenseNet) -> Result<Grads, CheckpointError> {
    let mut g = like.zero_grads();
    for (k, l) in like.layers.iter().enumerate() {
        let fl = r.expect(tag)?;
        g.w[k] = r.floats(fl.first().copied().unwrap_or(""), l.w.len())?;
        g.b[k] = r.floats(fl.get(1).copied().unwrap_or(""), l.b.len())?;
    }
    Ok(g)
}

fn read_adam(r: &mut Reader<'_>, name: &str, like: &DenseNet) -> Result<Adam, CheckpointError> {
    let h = r.expect("adam")?;
    if h.first() != Some(&name) {
        return Err(r.err(&format!("expected optimizer {name}")));
    }
    let lr = r.float(&h, 1)?;
    let beta1 = r.float(&h, 2)?;
    let beta2 = r.float(&h, 3)?;
    let eps = r.float(&h, 4)?;
    let t: u64 = r.field(&h, 5)?;
    let m = read_grads(r, "m", like)?;
    let v = read_grads(r, "v", like)?;
    Ok(Adam {
        lr,
        beta1,
        beta2,
        eps,
        t,
        m,
        v,
    })
}

fn read_config(r: &mut Reader<'_>) -> Result<TrainConfig, CheckpointError> {
    let mut c = TrainConfig::default();
    while r.peek_key() == Some("config") {
        let fl = r.expect("config")?;
        let key = *fl.first().ok_or_else(|| r.err("config key"))?;
        let val = *fl.get(1).ok_or_else(|| r.err("config value"))?;
        let float = || val.parse::<f64>().map_err(|_| r.err("config float"));
        let int = || val.parse::<usize>().map_err(|_| r.err("config integer"));
        let list = || parse_usize_list(val).ok_or_else(|| r.err("config list"));
        match key {
            "gamma" => c.gamma = float()?,
            "lr_actor" => c.lr_actor = float()?,
            "lr_critic" => c.lr_critic = float()?,
            "polyak_tau" => c.polyak_tau = float()?,
            "explore_sigma" => c.explore_sigma = float()?,
            "policy_noise" => c.policy_noise = float()?,
            "noise_clip" => c.noise_clip = float()?,
            "gumbel_tau_start" => c.gumbel_tau_start = float()?,
            "gumbel_tau_end" => c.gumbel_tau_end = float()?,
            "anneal_fraction" => c.anneal_fraction = float()?,
            "batch" => c.batch = int()?,
            "actor_delay" => c.actor_delay = int()?,
            "bootstrap_steps" => c.bootstrap_steps = int()?,
            "buffer_capacity" => c.buffer_capacity = int()?,
            "total_steps" => c.total_steps = int()?,
            "seed" => c.seed = val.parse().map_err(|_| r.err("config seed"))?,
            "f_hidden" => c.f_hidden = list()?,
            "pi_hidden" => c.pi_hidden = list()?,
            "q_hidden" => c.q_hidden = list()?,
            "project_targets" => c.project_targets = val.parse().map_err(|_| r.err("config flag"))?,
            _ => return Err(r.err("unknown config key")),
        }
    }
    Ok(c)
}

/// Reads the metadata without rebuilding the trainer.
pub fn read_checkpoint_meta(text: &str) -> Result<CheckpointMeta, CheckpointError> {
    let body = verify(text)?;
    let mut meta = CheckpointMeta::default();
    let mut norm_text = String::new();
    for line in body.lines() {
        if let Some(h) = line.strip_prefix("corpus ") {
            meta.corpus_hash = String::from(h);
        } else if let Some(kv) = line.strip_prefix("meta ") {
            let (k, v) = kv.split_once(' ').unwrap_or((kv, ""));
            meta.extra.push((String::from(k), String::from(v)));
        } else if let Some(n) = line.strip_prefix("norm ") {
            norm_text.push_str(n);
            norm_text.push('\n');
        } else if line.starts_with("net ") {
            break;
        }
    }
    if !norm_text.is_empty() {
        meta.norm = Some(NormStats::from_text(&norm_text).map_err(|e| CheckpointError::Malformed {
            line: 0,
            msg: format!("{e}"),
        })?);
    }
    Ok(meta)
}

fn verify(text: &str) -> Result<&str, CheckpointError> {
    let first = text.lines().next().unwrap_or("");
    if first != CHECKPOINT_TAG {
        return Err(CheckpointError::Version(String::from(first)));
    }
    let trimmed = text.trim_end_matches('\n');
    let cut = trimmed.rfind('\n').ok_or(CheckpointError::Checksum)?;
    let (body, last) = (&text[..cut + 1], &trimmed[cut + 1..]);
    let declared = last.strip_prefix("sha256 ").ok_or(CheckpointError::Checksum)?;
    if sha256_hex(body.as_bytes()) != declared {
        return Err(CheckpointError::Checksum);
    }
    Ok(body)
}

/// Rebuilds a trainer, refusing checkpoints written for another corpus.
pub fn load_checkpoint<E: Environment>(
    text: &str,
    env: &E,
    expected_corpus: &str,
) -> Result<(Trainer<E::State>, CheckpointMeta), CheckpointError> {
    let meta = read_checkpoint_meta(text)?;
    if meta.corpus_hash != expected_corpus {
        return Err(CheckpointError::CorpusMismatch {
            expected: String::from(expected_corpus),
            found: meta.corpus_hash,
        });
    }
    let body = verify(text)?;
    let mut r = Reader {
        lines: body.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
        pos: 0,
    };
    r.pos = 1;
    let enc = r.expect("encoding")?;
    if enc.first() != Some(&ENCODING) {
        return Err(r.err("unknown float encoding"));
    }
    r.expect("corpus")?;
    while r.peek_key() == Some("meta") {
        r.pos += 1;
    }
    let config = read_config(&mut r)?;
    let step: usize = {
        let v = r.expect("step")?;
        r.field(&v, 0)?
    };
    let episode: usize = {
        let v = r.expect("episode")?;
        r.field(&v, 0)?
    };
    let skipped: usize = {
        let v = r.expect("skipped")?;
        r.field(&v, 0)?
    };
    let critic_updates: u64 = {
        let v = r.expect("critic_updates")?;
        r.field(&v, 0)?
    };
    let rng = {
        let v = r.expect("rng")?;
        let seed_hex = *v.first().ok_or_else(|| r.err("rng seed"))?;
        if seed_hex.len() != 64 {
            return Err(r.err("rng seed"));
        }
        let mut seed = [0u8; 32];
        for (k, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&seed_hex[2 * k..2 * k + 2], 16).map_err(|_| r.err("rng seed"))?;
        }
        let stream: u64 = r.field(&v, 1)?;
        let word_pos: u128 = r.field(&v, 2)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        rng
    };
    let losses = {
        let v = r.expect("losses")?;
        LossSums {
            critic: (r.float(&v, 0)?, r.field(&v, 1)?),
            actor: (r.float(&v, 2)?, r.field(&v, 3)?),
            f_ce: (r.float(&v, 4)?, r.field(&v, 5)?),
        }
    };
    let current = {
        let v = r.expect("current")?;
        if v.first() == Some(&"none") {
            None
        } else {
            let k: usize = r.field(&v, 0)?;
            let key = v[1..].join(" ");
            let s = env.restore_state(&key).ok_or(CheckpointError::State(key))?;
            Some((s, k))
        }
    };
    while r.peek_key() == Some("norm") {
        r.pos += 1;
    }
    let f = read_net(&mut r, "f")?;
    let pi = read_net(&mut r, "pi")?;
    let q1 = read_net(&mut r, "q1")?;
    let q2 = read_net(&mut r, "q2")?;
    let f_target = read_net(&mut r, "f_target")?;
    let pi_target = read_net(&mut r, "pi_target")?;
    let q1_target = read_net(&mut r, "q1_target")?;
    let q2_target = read_net(&mut r, "q2_target")?;
    let opt_f = read_adam(&mut r, "f", &f)?;
    let opt_pi = read_adam(&mut r, "pi", &pi)?;
    let opt_q1 = read_adam(&mut r, "q1", &q1)?;
    let opt_q2 = read_adam(&mut r, "q2", &q2)?;
    let agent = Agent {
        f,
        pi,
        q1,
        q2,
        f_target,
        pi_target,
        q1_target,
        q2_target,
        opt_f,
        opt_pi,
        opt_q1,
        opt_q2,
        critic_updates,
    };
    if agent.state_dim() != env.state_dim()
        || agent.n_templates() != env.n_templates()
        || agent.action_dim() != env.action_dim()
    {
        return Err(r.err("network shapes do not fit the environment"));
    }

    let bh = r.expect("buffer")?;
    let capacity: usize = r.field(&bh, 0)?;
    let len: usize = r.field(&bh, 1)?;
    let cursor: usize = r.field(&bh, 2)?;
    let mut items = Vec::with_capacity(len);
    for _ in 0..len {
        let v = r.expect("tr")?;
        if v.len() != 8 {
            return Err(r.err("transition fields"));
        }
        let action = if v[5] == "-" {
            Vec::new()
        } else {
            parse_hex_floats(v[5]).ok_or_else(|| r.err("transition action"))?
        };
        items.push(Transition {
            template: r.field(&v, 0)?,
            reward: r.float(&v, 1)?,
            done: match v[2] {
                "1" => true,
                "0" => false,
                _ => return Err(r.err("transition done flag")),
            },
            mask: parse_mask(v[3]).ok_or_else(|| r.err("transition mask"))?,
            next_mask: parse_mask(v[4]).ok_or_else(|| r.err("transition mask"))?,
            action,
            state: parse_sparse(v[6]).ok_or_else(|| r.err("transition state"))?,
            next_state: parse_sparse(v[7]).ok_or_else(|| r.err("transition state"))?,
        });
    }
    let buffer = ReplayBuffer::from_parts(capacity, items, cursor).ok_or_else(|| r.err("buffer layout"))?;
    r.expect("end")?;

    Ok((
        Trainer {
            config,
            agent,
            buffer,
            rng,
            step,
            episode,
            current,
            skipped,
            losses,
        },
        meta,
    ))
}
