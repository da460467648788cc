//! Episodes, training runs and parameter sweeps with seeded, reproducible
//! outputs.

mod config;
mod env;
mod episode;
mod metrics;
mod sweep;
mod train;

use thiserror::Error;

pub use config::{builtin_map, AgentConfig, AgentOverride, ExperimentConfig, BUILTIN_PREFIX};
pub use env::Environment;
pub use episode::{run_episode, run_episode_with_loss, EpisodeLoss, Mode, DEFAULT_LOG_GAMMA};
pub use metrics::{
    metrics_to_string, read_metrics, write_metrics, MetricsRecord, MetricsRow, METRICS_HEADER,
};
pub use sweep::{sweep, CellFailure, SweepCell, SweepResults, SweepSpec};
pub use train::{build_agents, evaluate, social_metric, train, train_cell, TrainOutcome};

use crate::engine::{EngineError, MapError};
use crate::games::GameError;
use crate::learner::LearnerError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Game(GameError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("incompatible log: {0}")]
    IncompatibleLog(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// True for problems with user-supplied configuration rather than
    /// failures while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Map(_)
                | HarnessError::Game(GameError::InvalidParams(_))
                | HarnessError::Learner(LearnerError::InvalidConfig(_))
        )
    }
}

impl From<EngineError> for HarnessError {
    fn from(e: EngineError) -> Self {
        HarnessError::Game(GameError::Engine(e))
    }
}
