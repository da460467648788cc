//! Independent Q-learning: a small feed-forward value network trained by
//! gradient descent on the mean squared Bellman residual, epsilon-greedy
//! action selection, and a bounded FIFO replay batch.

mod agent;
mod checkpoint;
mod network;
mod replay;
mod schedule;
mod td;

use thiserror::Error;

pub use agent::{
    act, epsilon_greedy, Controller, DqnAgent, Exploration, FixedAction, GreedyPolicy,
    LearnerConfig, ScriptedController,
};
pub use checkpoint::{
    decode_policy, encode_policy, load_policy, save_policy, Checkpoint, CHECKPOINT_VERSION,
};
pub use network::{argmax, Activations, Gradients, QNetwork};
pub use replay::{ReplayBuffer, Transition, DEFAULT_REPLAY_CAPACITY};
pub use schedule::EpsilonSchedule;
pub use td::{bellman_targets, td_loss_and_gradient, td_update, TdSample};

/// Default hidden layer widths.
pub const DEFAULT_HIDDEN: [usize; 2] = [32, 32];

/// Layer sizes of an observation network with the given hidden widths.
pub fn observation_layer_dims(hidden: &[usize]) -> Vec<usize> {
    let mut dims = vec![crate::engine::OBS_LEN];
    dims.extend_from_slice(hidden);
    dims.push(crate::engine::Action::COUNT);
    dims
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid layer sizes {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LearnerError {
    fn from(e: std::io::Error) -> Self {
        LearnerError::Io(e.to_string())
    }
}
