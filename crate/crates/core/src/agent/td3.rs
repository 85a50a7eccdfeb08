use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::env::EnvRng;
use crate::featurize::SparseVec;

use super::adam::Adam;
use super::buffer::{ReplayBuffer, Transition};
use super::gumbel::{gumbel_noise, gumbel_softmax_backward, gumbel_softmax_with_noise, masked_log_softmax};
use super::net::{Activation, DenseNet, Grads, NetInput};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub batch: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub polyak_tau: f64,
    pub explore_sigma: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub actor_delay: usize,
    pub bootstrap_steps: usize,
    pub buffer_capacity: usize,
    pub gumbel_tau_start: f64,
    pub gumbel_tau_end: f64,
    /// Fraction of `total_steps` over which the temperature is annealed.
    pub anneal_fraction: f64,
    pub total_steps: usize,
    pub seed: u64,
    pub f_hidden: Vec<usize>,
    pub pi_hidden: Vec<usize>,
    pub q_hidden: Vec<usize>,
    /// Replace each smoothed target action by the action the environment
    /// would execute for it before evaluating the target critics.
    pub project_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            batch: 32,
            lr_actor: 1e-4,
            lr_critic: 3e-4,
            polyak_tau: 0.005,
            explore_sigma: 0.1,
            policy_noise: 0.2,
            noise_clip: 0.2,
            actor_delay: 2,
            bootstrap_steps: 3000,
            buffer_capacity: 100_000,
            gumbel_tau_start: 1.0,
            gumbel_tau_end: 0.1,
            anneal_fraction: 0.5,
            total_steps: 20_000,
            seed: 0,
            f_hidden: vec![256, 128, 128],
            pi_hidden: vec![256, 256],
            q_hidden: vec![256, 64, 16],
            project_targets: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("gamma", self.gamma),
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("polyak_tau", self.polyak_tau),
            ("gumbel_tau_start", self.gumbel_tau_start),
            ("gumbel_tau_end", self.gumbel_tau_end),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(alloc::format!("{name} must be positive"));
            }
        }
        if self.polyak_tau > 1.0 {
            return Err(String::from("polyak_tau must lie in (0, 1]"));
        }
        if self.gamma > 1.0 {
            return Err(String::from("gamma must not exceed 1"));
        }
        for (name, v) in [("explore_sigma", self.explore_sigma), ("policy_noise", self.policy_noise), ("noise_clip", self.noise_clip)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(alloc::format!("{name} must be non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.anneal_fraction) {
            return Err(String::from("anneal_fraction must lie in [0, 1]"));
        }
        for (name, v) in [("batch", self.batch), ("actor_delay", self.actor_delay), ("buffer_capacity", self.buffer_capacity)] {
            if v == 0 {
                return Err(alloc::format!("{name} must be positive"));
            }
        }
        if self.f_hidden.contains(&0) || self.pi_hidden.contains(&0) || self.q_hidden.contains(&0) {
            return Err(String::from("hidden layer widths must be positive"));
        }
        Ok(())
    }

    /// Gumbel temperature after `step` environment steps: linear from start
    /// to end over the annealing window, constant afterwards.
    pub fn gumbel_tau(&self, step: usize) -> f64 {
        let window = self.anneal_fraction * self.total_steps as f64;
        let frac = if window <= 0.0 { 1.0 } else { (step as f64 / window).min(1.0) };
        self.gumbel_tau_start + (self.gumbel_tau_end - self.gumbel_tau_start) * frac
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("non-finite {what} at critic update {update}")]
    NonFinite { what: &'static str, update: u64 },
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    NotEnoughData { have: usize, need: usize },
}

/// Maps `(template, proposed action)` to the action that would be executed.
pub type Projection<'a> = &'a dyn Fn(usize, &[f64]) -> Vec<f64>;

/// Projection that leaves actions unchanged.
pub fn identity_projection(_template: usize, a: &[f64]) -> Vec<f64> {
    a.to_vec()
}

/// How [`Agent::act`] perturbs its choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActMode {
    /// Gumbel noise on the template and Gaussian noise on the action.
    Explore,
    /// Gumbel noise only.
    Sample,
    /// No noise at all: argmax template and the bare policy output.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub template: usize,
    pub soft: Vec<f64>,
    pub action: Vec<f64>,
    /// Policy output before exploration noise.
    pub raw: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossReport {
    pub critic: f64,
    pub actor: Option<f64>,
    pub f_ce: Option<f64>,
}

pub fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn input<'a>(s: &'a SparseVec, dense: &'a [f64]) -> NetInput<'a> {
    NetInput { sparse: s, dense }
}

/// Mean squared error of `q` against targets `y` over `batch`, with its
/// parameter gradient.
pub fn critic_loss_and_grads(q: &DenseNet, batch: &[&Transition], y: &[f64], n_templates: usize) -> (f64, Grads) {
    let n = batch.len() as f64;
    let mut g = q.zero_grads();
    let dense: Vec<Vec<f64>> = batch
        .iter()
        .map(|tr| concat(&one_hot(n_templates, tr.template), &tr.action))
        .collect();
    let xs: Vec<NetInput<'_>> = batch.iter().zip(&dense).map(|(tr, d)| input(&tr.state, d)).collect();
    let tape = q.forward_batch(&xs);
    let mut loss = 0.0;
    let mut dys = Vec::with_capacity(batch.len());
    for (b, &yi) in y.iter().enumerate() {
        let diff = tape.output(b)[0] - yi;
        loss += diff * diff / n;
        dys.push(vec![2.0 * diff / n]);
    }
    q.backward_batch(&xs, &tape, &dys, &mut g);
    (loss, g)
}

/// Actor objective `mean(-Q1(s, T, pi(s, T)))` with the relaxed template
/// `T` at fixed Gumbel `noise`, plus the template cross-entropy against the
/// executed template. Returns both loss terms and the gradients of their sum
/// for `f` and `pi`.
pub fn actor_loss_and_grads(
    f: &DenseNet,
    pi: &DenseNet,
    q1: &DenseNet,
    batch: &[&Transition],
    noise: &[Vec<f64>],
    tau: f64,
) -> (f64, f64, Grads, Grads) {
    let n = batch.len() as f64;
    let n_t = f.n_out();
    let mut gf = f.zero_grads();
    let mut gpi = pi.zero_grads();
    let mut gq_scratch = q1.zero_grads();
    let empty: [f64; 0] = [];

    let fx: Vec<NetInput<'_>> = batch.iter().map(|tr| input(&tr.state, &empty)).collect();
    let f_tape = f.forward_batch(&fx);
    let soft: Vec<Vec<f64>> = batch
        .iter()
        .zip(noise)
        .enumerate()
        .map(|(b, (tr, eps))| gumbel_softmax_with_noise(f_tape.output(b), &tr.mask, tau, eps).0)
        .collect();
    let pi_x: Vec<NetInput<'_>> = batch.iter().zip(&soft).map(|(tr, t)| input(&tr.state, t)).collect();
    let pi_tape = pi.forward_batch(&pi_x);
    let q_dense: Vec<Vec<f64>> = soft.iter().enumerate().map(|(b, t)| concat(t, pi_tape.output(b))).collect();
    let q_x: Vec<NetInput<'_>> = batch.iter().zip(&q_dense).map(|(tr, d)| input(&tr.state, d)).collect();
    let q_tape = q1.forward_batch(&q_x);

    let actor = -(0..batch.len()).map(|b| q_tape.output(b)[0]).sum::<f64>() / n;
    let dq_in = q1.backward_batch(&q_x, &q_tape, &vec![vec![-1.0 / n]; batch.len()], &mut gq_scratch);
    let da: Vec<Vec<f64>> = dq_in.iter().map(|d| d[n_t..].to_vec()).collect();
    let dpi_in = pi.backward_batch(&pi_x, &pi_tape, &da, &mut gpi);

    let mut ce = 0.0;
    let mut dlogits_all = Vec::with_capacity(batch.len());
    for (b, tr) in batch.iter().enumerate() {
        let dsoft: Vec<f64> = dq_in[b][..n_t].iter().zip(&dpi_in[b]).map(|(x, y)| x + y).collect();
        let mut dlogits = gumbel_softmax_backward(&soft[b], tau, &dsoft);
        let logp = masked_log_softmax(f_tape.output(b), &tr.mask);
        ce -= logp[tr.template] / n;
        for j in 0..n_t {
            if tr.mask[j] {
                let target = if j == tr.template { 1.0 } else { 0.0 };
                dlogits[j] += (libm::exp(logp[j]) - target) / n;
            }
        }
        dlogits_all.push(dlogits);
    }
    f.backward_batch(&fx, &f_tape, &dlogits_all, &mut gf);
    (actor, ce, gf, gpi)
}

/// Actor (template network `f` and action network `pi`), twin critics,
/// their targets and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub f: DenseNet,
    pub pi: DenseNet,
    pub q1: DenseNet,
    pub q2: DenseNet,
    pub f_target: DenseNet,
    pub pi_target: DenseNet,
    pub q1_target: DenseNet,
    pub q2_target: DenseNet,
    pub opt_f: Adam,
    pub opt_pi: Adam,
    pub opt_q1: Adam,
    pub opt_q2: Adam,
    pub critic_updates: u64,
}

fn sizes(n_in: usize, hidden: &[usize], n_out: usize) -> Vec<usize> {
    let mut s = vec![n_in];
    s.extend_from_slice(hidden);
    s.push(n_out);
    s
}

impl Agent {
    pub fn new(state_dim: usize, n_templates: usize, action_dim: usize, cfg: &TrainConfig, rng: &mut EnvRng) -> Agent {
        let f = DenseNet::new(
            &sizes(state_dim, &cfg.f_hidden, n_templates),
            Activation::Relu,
            Activation::Linear,
            rng,
        );
        let pi = DenseNet::new(
            &sizes(state_dim + n_templates, &cfg.pi_hidden, action_dim),
            Activation::Relu,
            Activation::Tanh,
            rng,
        );
        let q_in = state_dim + n_templates + action_dim;
        let q1 = DenseNet::new(&sizes(q_in, &cfg.q_hidden, 1), Activation::Relu, Activation::Linear, rng);
        let q2 = DenseNet::new(&sizes(q_in, &cfg.q_hidden, 1), Activation::Relu, Activation::Linear, rng);
        Agent {
            opt_f: Adam::new(&f, cfg.lr_actor),
            opt_pi: Adam::new(&pi, cfg.lr_actor),
            opt_q1: Adam::new(&q1, cfg.lr_critic),
            opt_q2: Adam::new(&q2, cfg.lr_critic),
            f_target: f.clone(),
            pi_target: pi.clone(),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            f,
            pi,
            q1,
            q2,
            critic_updates: 0,
        }
    }

    pub fn n_templates(&self) -> usize {
        self.f.n_out()
    }

    pub fn action_dim(&self) -> usize {
        self.pi.n_out()
    }

    pub fn state_dim(&self) -> usize {
        self.f.n_in()
    }

    pub fn act(&self, s: &SparseVec, mask: &[bool], tau: f64, mode: ActMode, sigma: f64, rng: &mut EnvRng) -> Action {
        let empty: [f64; 0] = [];
        let logits = self.f.forward(input(s, &empty)).output().to_vec();
        let noise = match mode {
            ActMode::Greedy => vec![0.0; logits.len()],
            _ => gumbel_noise(logits.len(), rng),
        };
        let (soft, template) = gumbel_softmax_with_noise(&logits, mask, tau, &noise);
        let raw = self.pi.forward(input(s, &soft)).output().to_vec();
        let action = if mode == ActMode::Explore && sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("valid sigma");
            raw.iter().map(|&x| (x + normal.sample(rng)).clamp(-1.0, 1.0)).collect()
        } else {
            raw.clone()
        };
        Action {
            template,
            soft,
            action,
            raw,
        }
    }

    /// TD targets `r + gamma (1 - done) min(Q1', Q2')` with a smoothed
    /// target action, passed through `project` when the config asks for it.
    pub fn targets(
        &self,
        batch: &[&Transition],
        cfg: &TrainConfig,
        tau: f64,
        rng: &mut EnvRng,
        project: Projection<'_>,
    ) -> Vec<f64> {
        let n_t = self.n_templates();
        let empty: [f64; 0] = [];
        let noise = Normal::new(0.0, cfg.policy_noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let live: Vec<&Transition> = batch.iter().copied().filter(|tr| !tr.done).collect();
        let fx: Vec<NetInput<'_>> = live.iter().map(|tr| input(&tr.next_state, &empty)).collect();
        let f_tape = self.f_target.forward_batch(&fx);
        let picks: Vec<(Vec<f64>, usize)> = live
            .iter()
            .enumerate()
            .map(|(b, tr)| {
                let eps = gumbel_noise(n_t, rng);
                gumbel_softmax_with_noise(f_tape.output(b), &tr.next_mask, tau, &eps)
            })
            .collect();
        let pi_x: Vec<NetInput<'_>> = live.iter().zip(&picks).map(|(tr, p)| input(&tr.next_state, &p.0)).collect();
        let pi_tape = self.pi_target.forward_batch(&pi_x);
        let dense: Vec<Vec<f64>> = picks
            .iter()
            .enumerate()
            .map(|(b, (_, hard))| {
                let a: Vec<f64> = pi_tape
                    .output(b)
                    .iter()
                    .map(|&x| {
                        let e = if cfg.policy_noise > 0.0 {
                            noise.sample(rng).clamp(-cfg.noise_clip, cfg.noise_clip)
                        } else {
                            0.0
                        };
                        (x + e).clamp(-1.0, 1.0)
                    })
                    .collect();
                let a = if cfg.project_targets { project(*hard, &a) } else { a };
                concat(&one_hot(n_t, *hard), &a)
            })
            .collect();
        let qx: Vec<NetInput<'_>> = live.iter().zip(&dense).map(|(tr, d)| input(&tr.next_state, d)).collect();
        let q1 = self.q1_target.forward_batch(&qx);
        let q2 = self.q2_target.forward_batch(&qx);
        let mut b = 0;
        batch
            .iter()
            .map(|tr| {
                if tr.done {
                    return tr.reward;
                }
                let v = tr.reward + cfg.gamma * q1.output(b)[0].min(q2.output(b)[0]);
                b += 1;
                v
            })
            .collect()
    }

    /// One TD3 update from a uniformly sampled minibatch.
    pub fn update(
        &mut self,
        buffer: &ReplayBuffer,
        cfg: &TrainConfig,
        tau: f64,
        rng: &mut EnvRng,
        project: Projection<'_>,
    ) -> Result<LossReport, AgentError> {
        if buffer.len() < cfg.batch {
            return Err(AgentError::NotEnoughData {
                have: buffer.len(),
                need: cfg.batch,
            });
        }
        let idx = buffer.sample_indices(cfg.batch, rng);
        let batch: Vec<&Transition> = idx.iter().map(|&i| buffer.get(i)).collect();
        self.update_on(&batch, cfg, tau, rng, project)
    }

    pub fn update_on(
        &mut self,
        batch: &[&Transition],
        cfg: &TrainConfig,
        tau: f64,
        rng: &mut EnvRng,
        project: Projection<'_>,
    ) -> Result<LossReport, AgentError> {
        let n_t = self.n_templates();
        let y = self.targets(batch, cfg, tau, rng, project);
        let (l1, g1) = critic_loss_and_grads(&self.q1, batch, &y, n_t);
        let (l2, g2) = critic_loss_and_grads(&self.q2, batch, &y, n_t);
        let update = self.critic_updates;
        if !(l1.is_finite() && l2.is_finite()) {
            return Err(AgentError::NonFinite {
                what: "critic loss",
                update,
            });
        }
        self.opt_q1.step(&mut self.q1, &g1);
        self.opt_q2.step(&mut self.q2, &g2);
        self.critic_updates += 1;
        let mut report = LossReport {
            critic: 0.5 * (l1 + l2),
            actor: None,
            f_ce: None,
        };

        if self.critic_updates % cfg.actor_delay as u64 == 0 {
            let noise: Vec<Vec<f64>> = batch.iter().map(|_| gumbel_noise(n_t, rng)).collect();
            let (actor, ce, gf, gpi) = actor_loss_and_grads(&self.f, &self.pi, &self.q1, batch, &noise, tau);
            if !(actor.is_finite() && ce.is_finite()) {
                return Err(AgentError::NonFinite {
                    what: "actor loss",
                    update,
                });
            }
            self.opt_f.step(&mut self.f, &gf);
            self.opt_pi.step(&mut self.pi, &gpi);
            report.actor = Some(actor);
            report.f_ce = Some(ce);
        }

        let t = cfg.polyak_tau;
        self.f_target.polyak_from(&self.f, t);
        self.pi_target.polyak_from(&self.pi, t);
        self.q1_target.polyak_from(&self.q1, t);
        self.q2_target.polyak_from(&self.q2, t);
        Ok(report)
    }

    pub fn is_finite(&self) -> bool {
        [&self.f, &self.pi, &self.q1, &self.q2].iter().all(|n| n.is_finite())
    }
}

/// A uniformly random valid template index.
pub fn random_template(mask: &[bool], rng: &mut EnvRng) -> usize {
    let valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    assert!(!valid.is_empty(), "template mask is all false");
    valid[rng.random_range(0..valid.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn scalar_target_by_hand() {
        // two linear critics fixed at 2 and 3 through their biases
        let mut rng = EnvRng::seed_from_u64(5);
        let cfg = TrainConfig {
            f_hidden: vec![2],
            pi_hidden: vec![2],
            q_hidden: vec![2],
            ..TrainConfig::default()
        };
        let mut agent = Agent::new(1, 1, 1, &cfg, &mut rng);
        for (net, v) in [(&mut agent.q1_target, 2.0), (&mut agent.q2_target, 3.0)] {
            for l in &mut net.layers {
                l.w.fill(0.0);
                l.b.fill(0.0);
            }
            net.layers.last_mut().unwrap().b[0] = v;
        }
        let mut tr = Transition {
            state: SparseVec::from_dense(&[1.0]),
            mask: vec![true],
            template: 0,
            action: vec![0.0],
            reward: 1.0,
            next_state: SparseVec::from_dense(&[1.0]),
            next_mask: vec![true],
            done: false,
        };
        let y = agent.targets(&[&tr], &cfg, 1.0, &mut rng, &identity_projection);
        assert!((y[0] - 2.98).abs() < 1e-12);
        tr.done = true;
        assert_eq!(agent.targets(&[&tr], &cfg, 1.0, &mut rng, &identity_projection), vec![1.0]);
    }

    #[test]
    fn tau_schedule() {
        let cfg = TrainConfig {
            total_steps: 1000,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.gumbel_tau(0), 1.0);
        assert!((cfg.gumbel_tau(250) - 0.55).abs() < 1e-12);
        assert!((cfg.gumbel_tau(500) - 0.1).abs() < 1e-12);
        assert!((cfg.gumbel_tau(900) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn targets_start_equal_to_live() {
        let mut rng = EnvRng::seed_from_u64(9);
        let cfg = TrainConfig {
            f_hidden: vec![4],
            pi_hidden: vec![4],
            q_hidden: vec![4],
            ..TrainConfig::default()
        };
        let a = Agent::new(3, 2, 2, &cfg, &mut rng);
        assert_eq!(a.f, a.f_target);
        assert_eq!(a.q2, a.q2_target);
    }
}
