//! The learner: template network `f`, action network `pi`, twin critics and
//! their targets, trained with TD3 on masked Gumbel-softmax template choices
//! and continuous reactant actions.

mod adam;
mod buffer;
mod checkpoint;
mod gumbel;
mod net;
mod td3;
mod train;

pub use adam::Adam;
pub use buffer::{ReplayBuffer, Transition};
pub use checkpoint::{
    load_checkpoint, read_checkpoint_meta, save_checkpoint, CheckpointError, CheckpointMeta, CHECKPOINT_TAG,
};
pub use gumbel::{gumbel_noise, gumbel_softmax, gumbel_softmax_backward, gumbel_softmax_with_noise, masked_log_softmax, GumbelSample};
pub use net::{Activation, BatchTape, DenseNet, Grads, Layer, NetInput, Tape};
pub use td3::{
    actor_loss_and_grads, critic_loss_and_grads, identity_projection, one_hot, random_template, ActMode, Action,
    Agent, AgentError, LossReport, Projection, TrainConfig,
};
pub use train::{greedy_episode, LossMeans, StepEvent, TrainError, TrainObserver, Trainer};
