use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::env::Environment;
use super::episode::{run_episode_with_loss, Mode};
use super::metrics::{write_metrics, MetricsRow};
use super::HarnessError;
use crate::engine::GameKind;
use crate::games::{beam_use_rate, EpisodeLog};
use crate::learner::{observation_layer_dims, save_policy, Controller, DqnAgent, QNetwork};
use crate::seed::derive_seed;

/// Final networks and the evaluation series of one run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policies: [QNetwork; 2],
    pub metrics: Vec<MetricsRow>,
    pub episodes: usize,
    pub frames: u64,
}

/// Builds both learners exactly as a training run would.
pub fn build_agents(cfg: &ExperimentConfig) -> Result<[DqnAgent; 2], HarnessError> {
    let make = |i: usize| -> Result<DqnAgent, HarnessError> {
        let a = cfg.agent(i);
        let mut init = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "init", i as u64));
        let net = QNetwork::random(&observation_layer_dims(&a.hidden), &mut init)?;
        Ok(DqnAgent::new(
            net,
            a.learner(),
            a.schedule(cfg.total_steps),
            a.buffer_capacity,
            derive_seed(cfg.seed, "agent", i as u64),
        )?)
    };
    Ok([make(0)?, make(1)?])
}

pub fn train(cfg: &ExperimentConfig) -> Result<TrainOutcome, HarnessError> {
    train_cell(cfg, "base")
}

/// Trains two independent learners for `total_steps` frames, evaluating
/// every `eval_interval` frames (checked at episode boundaries) and once
/// more at the end.
pub fn train_cell(cfg: &ExperimentConfig, cell_id: &str) -> Result<TrainOutcome, HarnessError> {
    cfg.validate()?;
    let map = cfg.load_map()?;
    let mut env = Environment::new(cfg.rules(), map, derive_seed(cfg.seed, "env", 0))?;
    let [mut a0, mut a1] = build_agents(cfg)?;
    // training never draws from this stream; exploration uses each agent's own
    let mut unused = ChaCha8Rng::seed_from_u64(0);

    let ckpt_dir = cfg.checkpoint_dir.as_ref().map(|d| cfg.resolve(d));
    let mut frames = 0u64;
    let mut episodes = 0usize;
    let mut metrics = Vec::new();
    let mut losses: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut next_eval = cfg.eval_interval.unwrap_or(u64::MAX);
    let mut next_ckpt = if cfg.checkpoint_interval == 0 {
        u64::MAX
    } else {
        cfg.checkpoint_interval
    };

    while frames < cfg.total_steps {
        let len = (cfg.total_steps - frames).min(cfg.episode_length as u64) as usize;
        env.reset(derive_seed(cfg.seed, "env", episodes as u64));
        let (_, loss) = run_episode_with_loss(
            &mut env,
            [&mut a0, &mut a1],
            Mode::Train,
            len,
            &mut unused,
        )?;
        for i in 0..2 {
            losses[i].extend(loss.mean[i]);
        }
        frames += len as u64;
        episodes += 1;

        if frames < cfg.total_steps && frames >= next_eval {
            metrics.push(evaluate(cfg, &env, [&mut a0, &mut a1], cell_id, frames, &mut losses)?);
            while next_eval <= frames {
                next_eval = next_eval.saturating_add(cfg.eval_interval.unwrap_or(u64::MAX));
            }
        }
        if let Some(dir) = &ckpt_dir {
            if frames < cfg.total_steps && frames >= next_ckpt {
                save_pair(dir, &format!("step{frames}"), [&a0, &a1], frames)?;
                while next_ckpt <= frames {
                    next_ckpt = next_ckpt.saturating_add(cfg.checkpoint_interval);
                }
            }
        }
    }
    metrics.push(evaluate(cfg, &env, [&mut a0, &mut a1], cell_id, frames, &mut losses)?);
    if let Some(dir) = &ckpt_dir {
        save_pair(dir, "final", [&a0, &a1], frames)?;
    }
    if let Some(path) = &cfg.metrics_path {
        let path = cfg.resolve(path);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        write_metrics(&metrics, fs::File::create(&path)?)?;
    }
    Ok(TrainOutcome {
        policies: [a0.network().clone(), a1.network().clone()],
        metrics,
        episodes,
        frames,
    })
}

fn save_pair(dir: &Path, tag: &str, agents: [&DqnAgent; 2], step: u64) -> Result<(), HarnessError> {
    for (i, a) in agents.iter().enumerate() {
        save_policy(a.network(), step, &dir.join(format!("agent{}_{tag}.bin", i + 1)))?;
    }
    Ok(())
}

/// Plays the configured number of evaluation episodes on fresh worlds with
/// streams derived from `(seed, step)`, leaving training streams untouched.
pub fn evaluate(
    cfg: &ExperimentConfig,
    template: &Environment,
    agents: [&mut DqnAgent; 2],
    cell_id: &str,
    step: u64,
    losses: &mut [Vec<f64>; 2],
) -> Result<MetricsRow, HarnessError> {
    let [a0, a1] = agents;
    let epsilon = [a0.epsilon(), a1.epsilon()];
    let base = derive_seed(cfg.seed, "eval", step);
    let mut logs = Vec::with_capacity(cfg.eval_episodes);
    for e in 0..cfg.eval_episodes.max(1) {
        let mut env = template.clone();
        env.reset(derive_seed(base, "env", e as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, "act", e as u64));
        let (log, _) = run_episode_with_loss(
            &mut env,
            [&mut *a0 as &mut dyn Controller, &mut *a1],
            Mode::Eval {
                epsilon: cfg.eval_epsilon,
            },
            cfg.episode_length,
            &mut rng,
        )?;
        logs.push(log);
    }
    let loss = [0, 1].map(|i| {
        let l = std::mem::take(&mut losses[i]);
        (!l.is_empty()).then(|| l.iter().sum::<f64>() / l.len() as f64)
    });
    Ok(MetricsRow {
        cell_id: cell_id.to_string(),
        seed: cfg.seed,
        step,
        returns: mean_returns(&logs),
        metric_name: cfg.metric_name().to_string(),
        metric: social_metric(cfg.game, &logs),
        epsilon,
        loss,
    })
}

fn mean_returns(logs: &[EpisodeLog]) -> [f64; 2] {
    let n = logs.len() as f64;
    let sum = logs.iter().fold([0.0; 2], |acc, l| {
        let r = l.returns();
        [acc[0] + r[0], acc[1] + r[1]]
    });
    [sum[0] / n, sum[1] / n]
}

/// Beam-use rate per agent (mean over episodes) for Gathering; mean pack
/// size over all captures for Wolfpack.
pub fn social_metric(game: GameKind, logs: &[EpisodeLog]) -> [Option<f64>; 2] {
    match game {
        GameKind::Gathering => [0, 1].map(|i| {
            Some(logs.iter().map(|l| beam_use_rate(l, i)).sum::<f64>() / logs.len() as f64)
        }),
        GameKind::Wolfpack => {
            let m = crate::games::capture_mean(logs.iter().flat_map(|l| l.captures()));
            [m, m]
        }
    }
}
