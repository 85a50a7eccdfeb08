//! The synthesis MDP: template masks, reactant lookup, stepping and the
//! random-search baseline.

mod index;
mod random;
mod replay;
mod synth;
pub mod toy;

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::featurize::SparseVec;
use crate::scoring::ScoreError;

pub use index::{default_min_compat, Block, BuildingBlockIndex, DropReason, IndexReport};
pub use random::random_search;
pub use replay::{replay_episode, ReplayError};
pub use synth::{EnvConfig, SynthEnv, SynthState};

/// Random source used by environments and agents.
pub type EnvRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("template {0} is not valid for the current state")]
    MaskedTemplate(usize),
    #[error("state has no valid template")]
    Terminal,
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("configuration: {0}")]
    Config(String),
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndReason {
    Horizon,
    NoTemplates,
    ApplyFailed,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Horizon => "horizon",
            EndReason::NoTemplates => "no_templates",
            EndReason::ApplyFailed => "apply_failed",
        }
    }

    pub fn from_name(s: &str) -> Option<EndReason> {
        [EndReason::Horizon, EndReason::NoTemplates, EndReason::ApplyFailed]
            .into_iter()
            .find(|r| r.as_str() == s)
    }
}

/// One executed reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub r1: String,
    pub template: String,
    pub r2: Option<String>,
    /// `None` when every candidate failed to react.
    pub product: Option<String>,
    /// Position of the product among the outcomes of the winning reaction.
    pub product_choice: usize,
    pub reward: f64,
    pub done: bool,
    pub reason: Option<EndReason>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeRecord {
    pub steps: Vec<StepRecord>,
}

impl EpisodeRecord {
    pub fn start(&self) -> Option<&str> {
        self.steps.first().map(|s| s.r1.as_str())
    }

    pub fn reason(&self) -> Option<EndReason> {
        self.steps.last().and_then(|s| s.reason)
    }

    pub fn max_reward(&self) -> Option<f64> {
        self.steps.iter().map(|s| s.reward).reduce(f64::max)
    }
}

/// Result of one environment transition.
#[derive(Debug, Clone)]
pub struct Outcome<S, I> {
    pub next: S,
    pub reward: f64,
    pub done: bool,
    /// Action actually executed, e.g. the feature row of the chosen reactant.
    pub executed: Vec<f64>,
    pub info: I,
}

/// Interface between the agent and an MDP with masked discrete templates and
/// continuous reactant actions.
pub trait Environment {
    type State: Clone;
    type Info;

    fn state_dim(&self) -> usize;
    fn n_templates(&self) -> usize;
    fn action_dim(&self) -> usize;

    fn observe(&self, s: &Self::State) -> SparseVec;
    fn mask(&self, s: &Self::State) -> Vec<bool>;

    fn reset(&mut self, rng: &mut EnvRng) -> Self::State;

    /// Text key from which [`Environment::restore_state`] rebuilds `s`.
    fn state_key(&self, s: &Self::State) -> String;
    fn restore_state(&self, key: &str) -> Option<Self::State>;

    /// Action for the bootstrap phase: the feature row of a uniformly drawn
    /// compatible reactant (any point for templates that take none).
    fn random_action(&self, s: &Self::State, template: usize, rng: &mut EnvRng) -> Vec<f64>;

    /// The action [`Environment::step`] would execute for `a` under
    /// `template`, without stepping. Defaults to `a` itself.
    fn project_action(&self, _template: usize, a: &[f64]) -> Vec<f64> {
        a.to_vec()
    }

    fn step(
        &mut self,
        s: &Self::State,
        template: usize,
        a: &[f64],
        step_index: usize,
        rng: &mut EnvRng,
    ) -> Result<Outcome<Self::State, Self::Info>, EnvError>;
}
