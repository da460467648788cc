use serde::{Deserialize, Serialize};

use super::{Event, GameError};
use crate::engine::Action;

/// Everything recorded about one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// Joint action as applied, including the prey's in Wolfpack.
    pub actions: Vec<Action>,
    pub rewards: [f64; 2],
    /// Whether each player was in play when the actions were chosen.
    pub active: [bool; 2],
    pub events: Vec<Event>,
}

/// The realised reward and action streams of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub gamma: f64,
    pub frames: Vec<FrameRecord>,
}

impl EpisodeLog {
    pub fn new(seed: u64, gamma: f64) -> Self {
        EpisodeLog {
            seed,
            gamma,
            frames: Vec::new(),
        }
    }

    pub fn push(&mut self, frame: FrameRecord) {
        self.frames.push(frame);
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Undiscounted per-player sum of rewards.
    pub fn returns(&self) -> [f64; 2] {
        self.frames.iter().fold([0.0; 2], |acc, f| {
            [acc[0] + f.rewards[0], acc[1] + f.rewards[1]]
        })
    }

    /// Per-player sum of `gamma^t * r_t`.
    pub fn discounted_returns(&self) -> [f64; 2] {
        let mut g = [0.0; 2];
        let mut w = 1.0;
        for f in &self.frames {
            g[0] += w * f.rewards[0];
            g[1] += w * f.rewards[1];
            w *= self.gamma;
        }
        g
    }

    pub fn captures(&self) -> impl Iterator<Item = u8> + '_ {
        self.frames.iter().flat_map(|f| {
            f.events.iter().filter_map(|e| match e {
                Event::Capture { wolves, .. } => Some(*wolves),
                _ => None,
            })
        })
    }
}

/// Fraction of both-players-active frames in which `agent` fired its beam.
/// Zero when the players were never in play together.
pub fn beam_use_rate(log: &EpisodeLog, agent: usize) -> f64 {
    let (beams, both) = log
        .frames
        .iter()
        .filter(|f| f.active[0] && f.active[1])
        .fold((0usize, 0usize), |(b, n), f| {
            (b + usize::from(f.actions[agent] == Action::UseBeam), n + 1)
        });
    if both == 0 {
        0.0
    } else {
        beams as f64 / both as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureStats {
    /// Mean number of wolves sharing each capture, in `[1, 2]`.
    pub mean: f64,
    /// `2 - mean`: the lone-wolf capture tendency.
    pub plotted: f64,
    pub captures: usize,
}

/// Average pack size over the episode's captures.
pub fn wolves_per_capture(log: &EpisodeLog) -> Result<CaptureStats, GameError> {
    capture_stats(log.captures())
}

/// Mean pack size over any sequence of capture counts.
pub fn capture_mean(counts: impl Iterator<Item = u8>) -> Option<f64> {
    capture_stats(counts).ok().map(|s| s.mean)
}

pub(crate) fn capture_stats(counts: impl Iterator<Item = u8>) -> Result<CaptureStats, GameError> {
    let (sum, n) = counts.fold((0u64, 0usize), |(s, n), w| (s + u64::from(w), n + 1));
    if n == 0 {
        return Err(GameError::NoCaptures);
    }
    let mean = sum as f64 / n as f64;
    Ok(CaptureStats {
        mean,
        plotted: 2.0 - mean,
        captures: n,
    })
}
