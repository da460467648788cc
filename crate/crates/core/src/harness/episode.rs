use rand_chacha::ChaCha8Rng;

use super::env::Environment;
use super::HarnessError;
use crate::games::{EpisodeLog, FrameRecord};
use crate::learner::{Controller, Exploration, Transition};

/// Discount recorded in episode logs unless the caller overrides it.
pub const DEFAULT_LOG_GAMMA: f64 = 0.99;

/// Whether an episode trains its agents or just measures them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Agents explore on their own schedules and learn from every frame.
    Train,
    /// Agents play with a fixed epsilon drawn from the episode stream.
    Eval { epsilon: f64 },
}

/// Per-agent mean training loss over the episode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpisodeLoss {
    pub mean: [Option<f64>; 2],
}

/// Plays `length` frames from the environment's current state.
///
/// In training mode each agent receives exactly one transition per frame,
/// the last one flagged terminal.
pub fn run_episode(
    env: &mut Environment,
    agents: [&mut dyn Controller; 2],
    mode: Mode,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeLog, HarnessError> {
    run_episode_with_loss(env, agents, mode, length, rng).map(|(log, _)| log)
}

pub fn run_episode_with_loss(
    env: &mut Environment,
    agents: [&mut dyn Controller; 2],
    mode: Mode,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(EpisodeLog, EpisodeLoss), HarnessError> {
    let [a0, a1] = agents;
    let agents: [&mut dyn Controller; 2] = [a0, a1];
    let mut log = EpisodeLog::new(env.seed(), DEFAULT_LOG_GAMMA);
    let mut loss_sum = [0.0; 2];
    let mut loss_n = [0usize; 2];
    let mut obs = [env.observe(0), env.observe(1)];
    for t in 0..length {
        let active = env.active();
        let mut actions = [crate::engine::Action::StandStill; 2];
        for i in 0..2 {
            actions[i] = match mode {
                Mode::Train => agents[i].act(&obs[i], Exploration::Train),
                Mode::Eval { epsilon } => agents[i].act(&obs[i], Exploration::Fixed { epsilon, rng }),
            };
        }
        let (out, joint) = env.step(actions)?;
        let next = [env.observe(0), env.observe(1)];
        if mode == Mode::Train {
            for i in 0..2 {
                let tr = Transition {
                    obs: obs[i].clone(),
                    action: actions[i],
                    reward: out.rewards[i],
                    next_obs: next[i].clone(),
                    terminal: t + 1 == length,
                };
                if let Some(l) = agents[i].learn(tr)? {
                    loss_sum[i] += l;
                    loss_n[i] += 1;
                }
            }
        }
        log.push(FrameRecord {
            actions: joint,
            rewards: out.rewards,
            active,
            events: out.events,
        });
        obs = next;
    }
    let mean = [0, 1].map(|i| (loss_n[i] > 0).then(|| loss_sum[i] / loss_n[i] as f64));
    Ok((log, EpisodeLoss { mean }))
}
