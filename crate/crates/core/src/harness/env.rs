use std::sync::Arc;

use crate::engine::{render_observation, Action, GridMap, Observation, WorldState};
use crate::games::{
    gathering_step, prey_policy, wolfpack_step_with_prey, GameError, GameRules, StepOutcome,
};

use super::HarnessError;

/// A game instance: rules, map and the evolving world state.
#[derive(Debug, Clone)]
pub struct Environment {
    rules: GameRules,
    map: Arc<GridMap>,
    state: WorldState,
    seed: u64,
}

impl Environment {
    pub fn new(rules: GameRules, map: Arc<GridMap>, seed: u64) -> Result<Self, HarnessError> {
        rules.validate()?;
        let state = WorldState::new(Arc::clone(&map), rules.kind(), seed)?;
        Ok(Environment {
            rules,
            map,
            state,
            seed,
        })
    }

    /// Restarts from the initial state with a fresh world seed.
    pub fn reset(&mut self, seed: u64) {
        self.state = WorldState::new(Arc::clone(&self.map), self.rules.kind(), seed)
            .expect("map validated at construction");
        self.seed = seed;
    }

    /// World seed of the current episode.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rules(&self) -> &GameRules {
        &self.rules
    }

    pub fn map(&self) -> &Arc<GridMap> {
        &self.map
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Player `agent`'s view; blank while it is out of play.
    pub fn observe(&self, agent: usize) -> Observation {
        render_observation(&self.state, agent).unwrap_or_else(|_| Observation::blank(agent))
    }

    pub fn active(&self) -> [bool; 2] {
        [self.state.entities[0].active, self.state.entities[1].active]
    }

    /// Advances one frame. Returns the outcome and the full joint action
    /// applied (with the prey's action appended in Wolfpack).
    pub fn step(&mut self, actions: [Action; 2]) -> Result<(StepOutcome, Vec<Action>), HarnessError> {
        match &self.rules {
            GameRules::Gathering(p) => {
                let out = gathering_step(&mut self.state, &actions, p)?;
                Ok((out, actions.to_vec()))
            }
            GameRules::Wolfpack(p) => {
                let mut rng = self.state.rng.clone();
                let prey = prey_policy(&self.state, &mut rng);
                self.state.rng = rng;
                let out = wolfpack_step_with_prey(&mut self.state, actions, prey, p)?;
                Ok((out, vec![actions[0], actions[1], prey]))
            }
        }
    }

    /// Re-applies a recorded joint action. Fails if the recording does not
    /// match what this world would have produced.
    pub fn step_recorded(&mut self, joint: &[Action]) -> Result<StepOutcome, HarnessError> {
        let expected = self.state.entities.len();
        if joint.len() != expected {
            return Err(HarnessError::IncompatibleLog(format!(
                "frame {} has {} actions, world has {expected} entities",
                self.state.step,
                joint.len()
            )));
        }
        let (out, applied) = self.step([joint[0], joint[1]])?;
        if applied != joint {
            return Err(HarnessError::IncompatibleLog(format!(
                "prey action diverged at frame {}",
                self.state.step - 1
            )));
        }
        Ok(out)
    }
}

impl From<GameError> for HarnessError {
    fn from(e: GameError) -> Self {
        HarnessError::Game(e)
    }
}
