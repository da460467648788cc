use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::{CellEstimate, EmpiricalPayoffMatrix};
use super::pool::{PolicyClass, PolicyPool};
use super::EgtaError;
use crate::harness::{run_episode, Environment, Mode};

/// How each sampled pairing is played.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayoutSpec {
    pub episodes_per_draw: usize,
    pub episode_length: usize,
    /// Exploration during playouts; zero plays the policies greedily.
    pub epsilon: f64,
}

impl Default for PlayoutSpec {
    fn default() -> Self {
        PlayoutSpec {
            episodes_per_draw: 1,
            episode_length: 1000,
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// A fraction of the largest cell magnitude.
    Relative(f64),
}

/// Stop once every cell's standard error is below tolerance, or give up
/// after `max_episodes_per_cell` playouts of each pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub tolerance: Tolerance,
    pub max_episodes_per_cell: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            tolerance: Tolerance::Relative(0.01),
            max_episodes_per_cell: 1000,
        }
    }
}

impl StopRule {
    /// A cell with zero spread counts as converged whatever the tolerance.
    pub fn converged(&self, m: &EmpiricalPayoffMatrix) -> bool {
        let tol = match self.tolerance {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(f) => {
                f * m.cells().iter().map(|(_, c)| c.mean.abs()).fold(0.0, f64::max)
            }
        };
        m.cells()
            .iter()
            .all(|(_, c)| c.n >= 2 && (c.se == 0.0 || c.se < tol))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffEstimate {
    pub matrix: EmpiricalPayoffMatrix,
    /// Set when the budget ran out before the cells converged.
    pub budget_exhausted: bool,
    pub rounds: u64,
    /// Playouts per pairing.
    pub episodes_per_pairing: u64,
}

const PAIRINGS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

struct Job {
    pairing: usize,
    members: (usize, usize),
    seed: u64,
    act_seed: u64,
}

/// Plays the four pool pairings round by round and pools per-player
/// undiscounted returns into R, P, S, T.
///
/// Both players' returns are samples: (C,C) feeds R twice, (D,D) feeds P
/// twice, and either off-diagonal ordering gives the cooperator's return
/// to S and the defector's to T. All randomness is drawn from `rng`
/// before any playout runs, so the result does not depend on how many
/// threads play the episodes.
pub fn estimate_payoffs(
    pools: (&PolicyPool, &PolicyPool),
    env: &Environment,
    play: &PlayoutSpec,
    stop: &StopRule,
    rng: &mut ChaCha8Rng,
) -> Result<PayoffEstimate, EgtaError> {
    let (coop, def) = pools;
    if coop.is_empty() {
        return Err(EgtaError::EmptyPool('C'));
    }
    if def.is_empty() {
        return Err(EgtaError::EmptyPool('D'));
    }
    if coop.label != PolicyClass::Cooperator || def.label != PolicyClass::Defector {
        return Err(EgtaError::OverlappingPools("pools passed in the wrong order".into()));
    }
    let per_draw = play.episodes_per_draw.max(1) as u64;
    let by_label = [coop, def];
    // R, P, S, T
    let mut samples: [Vec<f64>; 4] = Default::default();
    let mut matrix;
    let mut played = 0u64;
    let mut rounds = 0u64;

    loop {
        let mut jobs = Vec::new();
        for (k, &(a, b)) in PAIRINGS.iter().enumerate() {
            let i = rng.random_range(0..by_label[a].len());
            let j = rng.random_range(0..by_label[b].len());
            for _ in 0..per_draw {
                jobs.push(Job {
                    pairing: k,
                    members: (i, j),
                    seed: rng.random(),
                    act_seed: rng.random(),
                });
            }
        }
        let results: Vec<Result<[f64; 2], EgtaError>> = jobs
            .par_iter()
            .map(|job| {
                let (a, b) = PAIRINGS[job.pairing];
                let mut p0 = by_label[a].members[job.members.0].controller();
                let mut p1 = by_label[b].members[job.members.1].controller();
                let mut e = env.clone();
                e.reset(job.seed);
                let mut act = ChaCha8Rng::seed_from_u64(job.act_seed);
                let log = run_episode(
                    &mut e,
                    [&mut *p0, &mut *p1],
                    Mode::Eval {
                        epsilon: play.epsilon,
                    },
                    play.episode_length,
                    &mut act,
                )?;
                Ok(log.returns())
            })
            .collect();
        for (job, res) in jobs.iter().zip(results) {
            let [g0, g1] = res?;
            match job.pairing {
                0 => samples[0].extend([g0, g1]),
                1 => {
                    samples[2].push(g0);
                    samples[3].push(g1);
                }
                2 => {
                    samples[3].push(g0);
                    samples[2].push(g1);
                }
                _ => samples[1].extend([g0, g1]),
            }
        }
        played += per_draw;
        rounds += 1;
        matrix = EmpiricalPayoffMatrix {
            r: CellEstimate::from_samples(&samples[0]),
            p: CellEstimate::from_samples(&samples[1]),
            s: CellEstimate::from_samples(&samples[2]),
            t: CellEstimate::from_samples(&samples[3]),
        };
        if stop.converged(&matrix) {
            return Ok(PayoffEstimate {
                matrix,
                budget_exhausted: false,
                rounds,
                episodes_per_pairing: played,
            });
        }
        if played + per_draw > stop.max_episodes_per_cell {
            break;
        }
    }
    Ok(PayoffEstimate {
        matrix,
        budget_exhausted: true,
        rounds,
        episodes_per_pairing: played,
    })
}
