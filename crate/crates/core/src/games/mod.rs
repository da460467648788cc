//! Game rules layered on the engine: Gathering (apples and a tagging beam)
//! and Wolfpack (two wolves hunting a scripted prey), plus the per-episode
//! social-behaviour metrics.

mod gathering;
mod log;
mod wolfpack;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, EngineError, GameKind, WorldState};

pub use gathering::{gathering_step, GatheringParams};
pub use log::{beam_use_rate, capture_mean, wolves_per_capture, CaptureStats, EpisodeLog, FrameRecord};
pub use wolfpack::{greedy_escape, prey_policy, wolfpack_step, wolfpack_step_with_prey, WolfpackParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid game parameters: {0}")]
    InvalidParams(String),
    #[error("episode contains no capture events")]
    NoCaptures,
}

/// Something notable that happened during a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    AppleCollected { agent: usize, site: usize },
    BeamHit { shooter: usize, target: usize },
    Tagged { shooter: usize, target: usize },
    Capture { catcher: usize, wolves: u8 },
}

/// Rewards and events produced by one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepOutcome {
    pub rewards: [f64; 2],
    pub events: Vec<Event>,
}

/// Rule set plus parameters of one game.
#[derive(Debug, Clone, PartialEq)]
pub enum GameRules {
    Gathering(GatheringParams),
    Wolfpack(WolfpackParams),
}

impl GameRules {
    pub fn kind(&self) -> GameKind {
        match self {
            GameRules::Gathering(_) => GameKind::Gathering,
            GameRules::Wolfpack(_) => GameKind::Wolfpack,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        match self {
            GameRules::Gathering(p) => p.validate(),
            GameRules::Wolfpack(p) => p.validate(),
        }
    }

    /// Advances `state` one frame given the two learners' actions. In
    /// Wolfpack the prey acts through [`prey_policy`].
    pub fn step(&self, state: &mut WorldState, actions: [Action; 2]) -> Result<StepOutcome, GameError> {
        match self {
            GameRules::Gathering(p) => gathering_step(state, &actions, p),
            GameRules::Wolfpack(p) => wolfpack_step(state, actions, p),
        }
    }
}
