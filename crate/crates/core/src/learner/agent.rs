use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{argmax, QNetwork};
use super::replay::{ReplayBuffer, Transition};
use super::schedule::EpsilonSchedule;
use super::td::{td_update, TdSample};
use super::LearnerError;
use crate::engine::{Action, Observation, OBS_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub minibatch_size: usize,
    pub updates_per_step: usize,
    pub use_target_network: bool,
    pub target_sync_interval: u64,
    /// Transitions to collect before the first update.
    pub warmup: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            gamma: 0.99,
            learning_rate: 1e-3,
            minibatch_size: 32,
            updates_per_step: 1,
            use_target_network: false,
            target_sync_interval: 1000,
            warmup: 1000,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.minibatch_size == 0 {
            return bad("minibatch_size must be positive");
        }
        if self.use_target_network && self.target_sync_interval == 0 {
            return bad("target_sync_interval must be positive");
        }
        Ok(())
    }
}

/// Epsilon-greedy choice: with probability `epsilon` a uniform action,
/// otherwise the highest-valued one (lowest index on ties).
pub fn act<R: Rng + ?Sized>(
    net: &QNetwork,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
) -> Result<Action, LearnerError> {
    let q = net.forward(&obs.tensor())?;
    Ok(epsilon_greedy(&q, epsilon, rng))
}

pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> Action {
    if rng.random::<f64>() < epsilon {
        Action::ALL[rng.random_range(0..Action::COUNT)]
    } else {
        Action::from_index(argmax(q)).unwrap_or(Action::StandStill)
    }
}

/// How a controller should explore when choosing an action.
pub enum Exploration<'a> {
    /// Training: the controller's own schedule and random stream.
    Train,
    /// Evaluation: a fixed epsilon drawn against the caller's stream.
    Fixed { epsilon: f64, rng: &'a mut ChaCha8Rng },
}

/// Anything that can play one seat of a game.
pub trait Controller {
    fn act(&mut self, obs: &Observation, explore: Exploration<'_>) -> Action;

    /// Receives the controller's own transition. Learners store it and
    /// may update, returning the mean loss of any updates made.
    fn learn(&mut self, _transition: Transition) -> Result<Option<f64>, LearnerError> {
        Ok(None)
    }
}

/// Always plays the same action.
#[derive(Debug, Clone, Copy)]
pub struct FixedAction(pub Action);

impl Controller for FixedAction {
    fn act(&mut self, _obs: &Observation, _explore: Exploration<'_>) -> Action {
        self.0
    }
}

/// Replays a fixed action script, cycling when it runs out.
#[derive(Debug, Clone)]
pub struct ScriptedController {
    script: Vec<Action>,
    next: usize,
}

impl ScriptedController {
    pub fn new(script: Vec<Action>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        ScriptedController { script, next: 0 }
    }
}

impl Controller for ScriptedController {
    fn act(&mut self, _obs: &Observation, _explore: Exploration<'_>) -> Action {
        let a = self.script[self.next % self.script.len()];
        self.next += 1;
        a
    }
}

/// A frozen network played epsilon-greedily; greedy in training mode.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    pub net: Arc<QNetwork>,
    input: Vec<f64>,
}

impl GreedyPolicy {
    pub fn new(net: Arc<QNetwork>) -> Self {
        GreedyPolicy {
            net,
            input: vec![0.0; OBS_LEN],
        }
    }
}

impl Controller for GreedyPolicy {
    fn act(&mut self, obs: &Observation, explore: Exploration<'_>) -> Action {
        obs.write_tensor(&mut self.input);
        let q = self.net.forward(&self.input).expect("observation network");
        match explore {
            Exploration::Train => Action::from_index(argmax(&q)).unwrap_or(Action::StandStill),
            Exploration::Fixed { epsilon, rng } => epsilon_greedy(&q, epsilon, rng),
        }
    }
}

/// Independent deep Q-learner: owns its network, replay batch, schedule
/// and random stream, and shares nothing with any other agent.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    net: QNetwork,
    target: Option<QNetwork>,
    buffer: ReplayBuffer,
    cfg: LearnerConfig,
    schedule: EpsilonSchedule,
    rng: ChaCha8Rng,
    steps: u64,
    updates: u64,
    input: Vec<f64>,
    states: Vec<f64>,
    next_states: Vec<f64>,
}

impl DqnAgent {
    pub fn new(
        net: QNetwork,
        cfg: LearnerConfig,
        schedule: EpsilonSchedule,
        buffer_capacity: usize,
        seed: u64,
    ) -> Result<Self, LearnerError> {
        cfg.validate()?;
        if net.input_dim() != OBS_LEN || net.output_dim() != Action::COUNT {
            return Err(LearnerError::ShapeMismatch {
                expected: OBS_LEN,
                got: net.input_dim(),
            });
        }
        let target = cfg.use_target_network.then(|| net.clone());
        Ok(DqnAgent {
            net,
            target,
            buffer: ReplayBuffer::new(buffer_capacity),
            cfg,
            schedule,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            updates: 0,
            input: vec![0.0; OBS_LEN],
            states: Vec::new(),
            next_states: Vec::new(),
        })
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.epsilon_at(self.steps)
    }

    fn update(&mut self) -> Result<f64, LearnerError> {
        let n = self.cfg.minibatch_size;
        let idx = self.buffer.sample_indices(n, &mut self.rng);
        self.states.resize(n * OBS_LEN, 0.0);
        self.next_states.resize(n * OBS_LEN, 0.0);
        for (k, &i) in idx.iter().enumerate() {
            let t = self.buffer.get(i).expect("sampled index in range");
            t.obs
                .write_tensor(&mut self.states[k * OBS_LEN..(k + 1) * OBS_LEN]);
            t.next_obs
                .write_tensor(&mut self.next_states[k * OBS_LEN..(k + 1) * OBS_LEN]);
        }
        let batch: Vec<TdSample<'_>> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let t = self.buffer.get(i).expect("sampled index in range");
                TdSample {
                    state: &self.states[k * OBS_LEN..(k + 1) * OBS_LEN],
                    action: t.action.index(),
                    reward: t.reward,
                    next_state: &self.next_states[k * OBS_LEN..(k + 1) * OBS_LEN],
                    terminal: t.terminal,
                }
            })
            .collect();
        let loss = td_update(
            &mut self.net,
            self.target.as_ref(),
            &batch,
            self.cfg.gamma,
            self.cfg.learning_rate,
        )?;
        self.updates += 1;
        Ok(loss)
    }
}

impl Controller for DqnAgent {
    fn act(&mut self, obs: &Observation, explore: Exploration<'_>) -> Action {
        obs.write_tensor(&mut self.input);
        let q = self.net.forward(&self.input).expect("observation network");
        match explore {
            Exploration::Train => {
                let eps = self.schedule.epsilon_at(self.steps);
                epsilon_greedy(&q, eps, &mut self.rng)
            }
            Exploration::Fixed { epsilon, rng } => epsilon_greedy(&q, epsilon, rng),
        }
    }

    fn learn(&mut self, transition: Transition) -> Result<Option<f64>, LearnerError> {
        self.buffer.store(transition);
        self.steps += 1;
        let mut loss = None;
        if self.buffer.len() >= self.cfg.warmup.max(self.cfg.minibatch_size) {
            let mut total = 0.0;
            for _ in 0..self.cfg.updates_per_step {
                total += self.update()?;
            }
            if self.cfg.updates_per_step > 0 {
                loss = Some(total / self.cfg.updates_per_step as f64);
            }
        }
        if let Some(target) = &mut self.target {
            if self.steps.is_multiple_of(self.cfg.target_sync_interval) {
                target.clone_from(&self.net);
            }
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn greedy_limit_and_ties() {
        let mut r = rng(1);
        let q = [0.1, 0.5, -1.0, 0.5, 0.0, 0.0, 0.0, 0.2];
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(&q, 0.0, &mut r), Action::StepBackward);
        }
        let net = QNetwork::zeros(&[OBS_LEN, 8]).unwrap();
        assert_eq!(
            act(&net, &Observation::blank(0), 0.0, &mut r).unwrap(),
            Action::StepForward
        );
    }

    #[test]
    fn uniform_limit() {
        let mut r = rng(2);
        let q = [0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let n = 10_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[epsilon_greedy(&q, 1.0, &mut r).index()] += 1;
        }
        let p = 1.0 / 8.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn scaling_q_keeps_greedy_choice() {
        let mut r = rng(3);
        for _ in 0..200 {
            let q: Vec<f64> = (0..8).map(|_| r.random_range(-2.0..2.0)).collect();
            let scale = r.random_range(0.01..100.0);
            let scaled: Vec<f64> = q.iter().map(|v| v * scale).collect();
            assert_eq!(
                epsilon_greedy(&q, 0.0, &mut r),
                epsilon_greedy(&scaled, 0.0, &mut r)
            );
        }
    }

    fn transition(action: Action, reward: f64) -> Transition {
        Transition {
            obs: Observation::blank(0),
            action,
            reward,
            next_obs: Observation::blank(0),
            terminal: false,
        }
    }

    #[test]
    fn learns_only_after_warmup() {
        let cfg = LearnerConfig {
            warmup: 10,
            minibatch_size: 4,
            ..Default::default()
        };
        let net = QNetwork::random(&[OBS_LEN, 8, 8], &mut rng(4)).unwrap();
        let mut agent = DqnAgent::new(net, cfg, EpsilonSchedule::default(), 100, 4).unwrap();
        for i in 0..9 {
            assert_eq!(agent.learn(transition(Action::UseBeam, i as f64)).unwrap(), None);
        }
        assert!(agent.learn(transition(Action::UseBeam, 1.0)).unwrap().is_some());
        assert_eq!(agent.updates(), 1);
        assert_eq!(agent.buffer().len(), 10);
    }

    #[test]
    fn target_network_syncs_on_interval() {
        let cfg = LearnerConfig {
            warmup: 1,
            minibatch_size: 1,
            use_target_network: true,
            target_sync_interval: 3,
            learning_rate: 0.1,
            ..Default::default()
        };
        let net = QNetwork::random(&[OBS_LEN, 8, 8], &mut rng(5)).unwrap();
        let mut agent = DqnAgent::new(net, cfg, EpsilonSchedule::default(), 100, 5).unwrap();
        agent.learn(transition(Action::UseBeam, 1.0)).unwrap();
        assert_ne!(agent.target.as_ref().unwrap(), &agent.net);
        agent.learn(transition(Action::UseBeam, 1.0)).unwrap();
        agent.learn(transition(Action::UseBeam, 1.0)).unwrap();
        assert_eq!(agent.target.as_ref().unwrap(), &agent.net);
    }

    #[test]
    fn rejects_wrong_shape_and_config() {
        let net = QNetwork::zeros(&[10, 8]).unwrap();
        assert!(DqnAgent::new(net, LearnerConfig::default(), EpsilonSchedule::default(), 10, 0)
            .is_err());
        let bad = LearnerConfig {
            gamma: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
