use alloc::vec::Vec;

use rand::SeedableRng;

use crate::env::{EnvError, EnvRng, Environment};

use super::buffer::{ReplayBuffer, Transition};
use super::td3::{random_template, ActMode, Agent, AgentError, LossReport, TrainConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("configuration: {0}")]
    Config(alloc::string::String),
}

/// What happened in one environment step of training.
#[derive(Debug)]
pub struct StepEvent<'a, I> {
    pub step: usize,
    pub episode: usize,
    pub episode_step: usize,
    pub template: usize,
    pub bootstrap: bool,
    pub reward: f64,
    pub done: bool,
    pub info: &'a I,
}

/// Callbacks from [`Trainer::run`]; all methods default to no-ops.
pub trait TrainObserver<I> {
    fn on_step(&mut self, _event: &StepEvent<'_, I>) {}
    fn on_update(&mut self, _step: usize, _report: &LossReport) {}
    /// A transition was dropped because the scorer failed.
    fn on_skip(&mut self, _step: usize, _error: &EnvError) {}
}

impl<I> TrainObserver<I> for () {}

/// Running means of losses since the last [`Trainer::take_losses`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossMeans {
    pub critic: Option<f64>,
    pub actor: Option<f64>,
    pub f_ce: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct LossSums {
    pub critic: (f64, u64),
    pub actor: (f64, u64),
    pub f_ce: (f64, u64),
}

fn mean((s, n): (f64, u64)) -> Option<f64> {
    (n > 0).then(|| s / n as f64)
}

/// Owns everything that evolves during training: the agent, replay buffer,
/// random stream and the in-flight episode.
#[derive(Debug, Clone)]
pub struct Trainer<S> {
    pub config: TrainConfig,
    pub agent: Agent,
    pub buffer: ReplayBuffer,
    pub rng: EnvRng,
    pub step: usize,
    pub episode: usize,
    /// Current state and its index within the episode.
    pub current: Option<(S, usize)>,
    pub skipped: usize,
    pub(crate) losses: LossSums,
}

impl<S: Clone> Trainer<S> {
    pub fn new<E: Environment<State = S>>(config: TrainConfig, env: &E) -> Result<Trainer<S>, TrainError> {
        config.validate().map_err(TrainError::Config)?;
        let mut rng = EnvRng::seed_from_u64(config.seed);
        let agent = Agent::new(env.state_dim(), env.n_templates(), env.action_dim(), &config, &mut rng);
        Ok(Trainer {
            buffer: ReplayBuffer::new(config.buffer_capacity),
            config,
            agent,
            rng,
            step: 0,
            episode: 0,
            current: None,
            skipped: 0,
            losses: LossSums::default(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.config.gumbel_tau(self.step)
    }

    pub fn take_losses(&mut self) -> LossMeans {
        let l = core::mem::take(&mut self.losses);
        LossMeans {
            critic: mean(l.critic),
            actor: mean(l.actor),
            f_ce: mean(l.f_ce),
        }
    }

    /// Advances training by `n` environment steps.
    pub fn run<E, O>(&mut self, env: &mut E, n: usize, observer: &mut O) -> Result<(), TrainError>
    where
        E: Environment<State = S>,
        O: TrainObserver<E::Info>,
    {
        for _ in 0..n {
            self.advance(env, observer)?;
        }
        Ok(())
    }

    fn advance<E, O>(&mut self, env: &mut E, observer: &mut O) -> Result<(), TrainError>
    where
        E: Environment<State = S>,
        O: TrainObserver<E::Info>,
    {
        let (s, k) = match self.current.take() {
            Some(c) => c,
            None => (env.reset(&mut self.rng), 0),
        };
        let mask = env.mask(&s);
        let obs = env.observe(&s);
        let bootstrap = self.step < self.config.bootstrap_steps;
        let (template, action) = if bootstrap {
            let t = random_template(&mask, &mut self.rng);
            (t, env.random_action(&s, t, &mut self.rng))
        } else {
            let a = self.agent.act(
                &obs,
                &mask,
                self.tau(),
                ActMode::Explore,
                self.config.explore_sigma,
                &mut self.rng,
            );
            (a.template, a.action)
        };

        match env.step(&s, template, &action, k, &mut self.rng) {
            Ok(out) => {
                let next_mask = env.mask(&out.next);
                let done = out.done || !next_mask.iter().any(|&m| m);
                observer.on_step(&StepEvent {
                    step: self.step,
                    episode: self.episode,
                    episode_step: k,
                    template,
                    bootstrap,
                    reward: out.reward,
                    done,
                    info: &out.info,
                });
                self.buffer.push(Transition {
                    state: obs,
                    mask,
                    template,
                    action: out.executed,
                    reward: out.reward,
                    next_state: env.observe(&out.next),
                    next_mask,
                    done,
                });
                if done {
                    self.episode += 1;
                } else {
                    self.current = Some((out.next, k + 1));
                }
            }
            Err(e @ EnvError::Score(_)) => {
                observer.on_skip(self.step, &e);
                self.skipped += 1;
                self.episode += 1;
            }
            Err(e) => return Err(e.into()),
        }

        if !bootstrap && self.buffer.len() >= self.config.batch {
            let tau = self.tau();
            let project = |t: usize, a: &[f64]| env.project_action(t, a);
            let report = self.agent.update(&self.buffer, &self.config, tau, &mut self.rng, &project)?;
            self.losses.critic.0 += report.critic;
            self.losses.critic.1 += 1;
            if let (Some(a), Some(c)) = (report.actor, report.f_ce) {
                self.losses.actor.0 += a;
                self.losses.actor.1 += 1;
                self.losses.f_ce.0 += c;
                self.losses.f_ce.1 += 1;
            }
            observer.on_update(self.step, &report);
        }
        self.step += 1;
        Ok(())
    }
}

/// One noiseless episode from `s0`. Returns the per-step `(template, info,
/// reward)` triples; empty when `s0` has no valid template.
pub fn greedy_episode<E: Environment>(
    agent: &Agent,
    env: &mut E,
    s0: E::State,
    tau: f64,
    rng: &mut EnvRng,
) -> Result<Vec<(usize, E::Info, f64)>, EnvError> {
    let mut out = Vec::new();
    let mut s = s0;
    for k in 0.. {
        let mask = env.mask(&s);
        if !mask.iter().any(|&m| m) {
            break;
        }
        let a = agent.act(&env.observe(&s), &mask, tau, ActMode::Greedy, 0.0, rng);
        let o = env.step(&s, a.template, &a.action, k, rng)?;
        out.push((a.template, o.info, o.reward));
        if o.done {
            break;
        }
        s = o.next;
    }
    Ok(out)
}
