use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::engine::{load_map_for, GameKind, GridMap, DEFAULT_GATHERING_MAP, DEFAULT_WOLFPACK_MAP};
use crate::games::{GameRules, GatheringParams, WolfpackParams};
use crate::learner::{EpsilonSchedule, LearnerConfig, DEFAULT_REPLAY_CAPACITY};

/// Map reference naming one of the shipped layouts.
pub const BUILTIN_PREFIX: &str = "builtin:";

/// Learning settings for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub learning_rate: f64,
    pub minibatch_size: usize,
    pub updates_per_step: usize,
    pub use_target_network: bool,
    pub target_sync_interval: u64,
    pub warmup: usize,
    pub buffer_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Defaults to half of `total_steps`.
    pub epsilon_decay_steps: Option<u64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        let l = LearnerConfig::default();
        AgentConfig {
            hidden: crate::learner::DEFAULT_HIDDEN.to_vec(),
            gamma: l.gamma,
            learning_rate: l.learning_rate,
            minibatch_size: l.minibatch_size,
            updates_per_step: l.updates_per_step,
            use_target_network: l.use_target_network,
            target_sync_interval: l.target_sync_interval,
            warmup: l.warmup,
            buffer_capacity: DEFAULT_REPLAY_CAPACITY,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_decay_steps: None,
        }
    }
}

impl AgentConfig {
    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            minibatch_size: self.minibatch_size,
            updates_per_step: self.updates_per_step,
            use_target_network: self.use_target_network,
            target_sync_interval: self.target_sync_interval,
            warmup: self.warmup,
        }
    }

    pub fn schedule(&self, total_steps: u64) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.epsilon_start,
            end: self.epsilon_end,
            decay_steps: self.epsilon_decay_steps.unwrap_or(total_steps / 2),
        }
    }
}

/// Per-agent overrides applied on top of the shared `[learner]` section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentOverride {
    pub hidden: Option<Vec<usize>>,
    pub gamma: Option<f64>,
    pub learning_rate: Option<f64>,
    pub minibatch_size: Option<usize>,
    pub updates_per_step: Option<usize>,
    pub use_target_network: Option<bool>,
    pub target_sync_interval: Option<u64>,
    pub warmup: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub epsilon_start: Option<f64>,
    pub epsilon_end: Option<f64>,
    pub epsilon_decay_steps: Option<u64>,
}

impl AgentOverride {
    pub fn apply(&self, base: &AgentConfig) -> AgentConfig {
        let mut c = base.clone();
        if let Some(v) = &self.hidden {
            c.hidden = v.clone();
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        over!(
            gamma,
            learning_rate,
            minibatch_size,
            updates_per_step,
            use_target_network,
            target_sync_interval,
            warmup,
            buffer_capacity,
            epsilon_start,
            epsilon_end
        );
        if self.epsilon_decay_steps.is_some() {
            c.epsilon_decay_steps = self.epsilon_decay_steps;
        }
        c
    }
}

/// One training run. Relative paths resolve against the directory of the
/// file the config was loaded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameKind,
    /// Map file path or `builtin:gathering` / `builtin:wolfpack`; the
    /// shipped map for `game` when omitted.
    #[serde(default)]
    pub map: Option<String>,
    #[serde(default = "default_episode_length")]
    pub episode_length: usize,
    pub total_steps: u64,
    pub seed: u64,
    #[serde(default)]
    pub eval_interval: Option<u64>,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_eval_epsilon")]
    pub eval_epsilon: f64,
    /// Checkpoint cadence in frames; 0 saves only at the end.
    #[serde(default)]
    pub checkpoint_interval: u64,
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
    #[serde(default)]
    pub metrics_path: Option<PathBuf>,
    #[serde(default)]
    pub gathering: GatheringParams,
    #[serde(default)]
    pub wolfpack: WolfpackParams,
    #[serde(default)]
    pub learner: AgentConfig,
    #[serde(default)]
    pub agent1: Option<AgentOverride>,
    #[serde(default)]
    pub agent2: Option<AgentOverride>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_episode_length() -> usize {
    1000
}

fn default_eval_episodes() -> usize {
    1
}

fn default_eval_epsilon() -> f64 {
    0.05
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(game: GameKind, total_steps: u64, seed: u64) -> Self {
        ExperimentConfig {
            game,
            map: None,
            episode_length: default_episode_length(),
            total_steps,
            seed,
            eval_interval: None,
            eval_episodes: default_eval_episodes(),
            eval_epsilon: default_eval_epsilon(),
            checkpoint_interval: 0,
            checkpoint_dir: None,
            metrics_path: None,
            gathering: GatheringParams::default(),
            wolfpack: WolfpackParams::default(),
            learner: AgentConfig::default(),
            agent1: None,
            agent2: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn from_value(value: toml::Value, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Reads and fully validates a config file, including the map.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let cfg = Self::from_toml_str(&text, &base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn rules(&self) -> GameRules {
        match self.game {
            GameKind::Gathering => GameRules::Gathering(self.gathering),
            GameKind::Wolfpack => GameRules::Wolfpack(self.wolfpack),
        }
    }

    pub fn agent(&self, i: usize) -> AgentConfig {
        let over = if i == 0 { &self.agent1 } else { &self.agent2 };
        match over {
            Some(o) => o.apply(&self.learner),
            None => self.learner.clone(),
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self.game {
            GameKind::Gathering => "beam_use_rate",
            GameKind::Wolfpack => "wolves_per_capture",
        }
    }

    /// Loads and checks the configured map.
    pub fn load_map(&self) -> Result<Arc<GridMap>, HarnessError> {
        let text = match self.map.as_deref() {
            None => builtin_map(self.game).to_string(),
            Some(m) if m.starts_with(BUILTIN_PREFIX) => match &m[BUILTIN_PREFIX.len()..] {
                "gathering" => DEFAULT_GATHERING_MAP.to_string(),
                "wolfpack" => DEFAULT_WOLFPACK_MAP.to_string(),
                other => return Err(HarnessError::Config(format!("unknown builtin map {other:?}"))),
            },
            Some(path) => {
                let p = self.resolve(Path::new(path));
                fs::read_to_string(&p)
                    .map_err(|e| HarnessError::Config(format!("map {}: {e}", p.display())))?
            }
        };
        Ok(Arc::new(load_map_for(&text, self.game)?))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.episode_length == 0 {
            return bad("episode_length must be positive".into());
        }
        if self.total_steps == 0 {
            return bad("total_steps must be positive".into());
        }
        if self.eval_interval == Some(0) {
            return bad("eval_interval must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.eval_epsilon) {
            return bad("eval_epsilon must lie in [0, 1]".into());
        }
        self.rules().validate()?;
        for i in 0..2 {
            let a = self.agent(i);
            a.learner().validate()?;
            if a.hidden.contains(&0) {
                return bad(format!("agent {} has a zero-width hidden layer", i + 1));
            }
            if a.buffer_capacity == 0 {
                return bad(format!("agent {} buffer_capacity must be positive", i + 1));
            }
            if !(0.0..=1.0).contains(&a.epsilon_start) || !(0.0..=1.0).contains(&a.epsilon_end) {
                return bad(format!("agent {} epsilon bounds must lie in [0, 1]", i + 1));
            }
        }
        self.load_map()?;
        Ok(())
    }
}

pub fn builtin_map(game: GameKind) -> &'static str {
    match game {
        GameKind::Gathering => DEFAULT_GATHERING_MAP,
        GameKind::Wolfpack => DEFAULT_WOLFPACK_MAP,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "game = \"gathering\"\ntotal_steps = 5000\nseed = 3\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.episode_length, 1000);
        assert_eq!(cfg.eval_epsilon, 0.05);
        assert_eq!(cfg.agent(0).hidden, vec![32, 32]);
        assert_eq!(cfg.agent(1).schedule(cfg.total_steps).decay_steps, 2500);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml_str(
            "game = \"gathering\"\ntotal_steps = 5\nseed = 3\nspeed = 1\n",
            Path::new("."),
        );
        assert!(matches!(err, Err(HarnessError::Config(_))));
        let err = ExperimentConfig::from_toml_str(
            "game = \"gathering\"\ntotal_steps = 5\nseed = 3\n[learner]\nlr = 1\n",
            Path::new("."),
        );
        assert!(matches!(err, Err(HarnessError::Config(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        let err = ExperimentConfig::from_toml_str(
            "game = \"gathering\"\ntotal_steps = 5\n",
            Path::new("."),
        );
        assert!(err.is_err());
    }

    #[test]
    fn overrides_layer_on_shared_learner() {
        let cfg = ExperimentConfig::from_toml_str(
            "game = \"wolfpack\"\ntotal_steps = 10\nseed = 1\n\
             [learner]\ngamma = 0.9\n[agent2]\nhidden = [64, 64]\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.agent(0).hidden, vec![32, 32]);
        assert_eq!(cfg.agent(1).hidden, vec![64, 64]);
        assert_eq!(cfg.agent(1).gamma, 0.9);
    }

    #[test]
    fn missing_map_file_is_config_error() {
        let mut cfg = ExperimentConfig::new(GameKind::Gathering, 10, 1);
        cfg.map = Some("no/such/map.txt".into());
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        cfg.map = Some("builtin:wolfpack".into());
        // wolfpack map lacks apples
        assert!(cfg.validate().is_err());
        cfg.game = GameKind::Wolfpack;
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::new(GameKind::Wolfpack, 1234, 9);
        cfg.agent1 = Some(AgentOverride {
            gamma: Some(0.5),
            ..Default::default()
        });
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), Path::new("")).unwrap();
        assert_eq!(back, cfg);
    }
}
