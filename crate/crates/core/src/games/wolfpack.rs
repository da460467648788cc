use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Event, GameError, StepOutcome};
use crate::engine::{cast_beam, Action, EntityKind, Position, SpawnRole, WorldState};

/// Probability that the scripted prey takes its best escape move.
pub const PREY_GREEDY_PROB: f64 = 0.8;

const PREY_MOVES: [Action; 4] = [
    Action::StepForward,
    Action::StepBackward,
    Action::StepLeft,
    Action::StepRight,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WolfpackParams {
    /// L1 radius around the prey within which wolves share a capture.
    pub capture_radius: u32,
    pub r_lone: f64,
    pub r_team: f64,
}

impl Default for WolfpackParams {
    fn default() -> Self {
        WolfpackParams {
            capture_radius: 3,
            r_lone: 1.0,
            r_team: 2.0,
        }
    }
}

impl WolfpackParams {
    pub fn validate(&self) -> Result<(), GameError> {
        if !(self.r_lone > 0.0 && self.r_team >= self.r_lone) {
            return Err(GameError::InvalidParams(
                "rewards must satisfy r_team >= r_lone > 0".into(),
            ));
        }
        Ok(())
    }
}

fn prey_index(state: &WorldState) -> Option<usize> {
    state
        .entities
        .iter()
        .position(|e| e.kind == EntityKind::Prey)
}

fn legal_moves(state: &WorldState, prey: usize) -> Vec<(Action, Position)> {
    let e = &state.entities[prey];
    PREY_MOVES
        .iter()
        .filter_map(|&a| {
            let (dx, dy) = a.displacement(e.orientation)?;
            let to = e.position.offset(dx, dy);
            state.is_free(to).then_some((a, to))
        })
        .collect()
}

fn nearest_wolf_distance(state: &WorldState, p: Position) -> u32 {
    state
        .entities
        .iter()
        .filter(|w| w.active && w.kind == EntityKind::Player)
        .map(|w| w.position.l1(p))
        .min()
        .unwrap_or(0)
}

/// The legal step that maximises L1 distance to the nearest wolf, earliest
/// action on ties; `StandStill` when boxed in.
pub fn greedy_escape(state: &WorldState) -> Action {
    let Some(prey) = prey_index(state) else {
        return Action::StandStill;
    };
    let mut best: Option<(Action, u32)> = None;
    for (a, to) in legal_moves(state, prey) {
        let d = nearest_wolf_distance(state, to);
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((a, d));
        }
    }
    best.map_or(Action::StandStill, |(a, _)| a)
}

/// Scripted evader: the greedy escape with probability 0.8, otherwise a
/// uniformly random legal step.
pub fn prey_policy<R: Rng + ?Sized>(state: &WorldState, rng: &mut R) -> Action {
    let Some(prey) = prey_index(state) else {
        return Action::StandStill;
    };
    let greedy = rng.random::<f64>() < PREY_GREEDY_PROB;
    let moves = legal_moves(state, prey);
    if moves.is_empty() {
        return Action::StandStill;
    }
    if greedy {
        greedy_escape(state)
    } else {
        moves[rng.random_range(0..moves.len())].0
    }
}

/// One Wolfpack frame with the scripted prey drawing from the world RNG.
pub fn wolfpack_step(
    state: &mut WorldState,
    wolf_actions: [Action; 2],
    params: &WolfpackParams,
) -> Result<StepOutcome, GameError> {
    let mut rng = state.rng.clone();
    let prey_action = prey_policy(state, &mut rng);
    state.rng = rng;
    wolfpack_step_with_prey(state, wolf_actions, prey_action, params)
}

/// One Wolfpack frame with an externally chosen prey action.
///
/// A capture happens when an active wolf ends the move phase within L1
/// distance 1 of the prey. Every wolf touching the prey or within
/// `capture_radius` of it shares the capture: a lone wolf earns `r_lone`,
/// a pair earns `r_team` each. The prey then respawns at a random prey
/// spawn.
pub fn wolfpack_step_with_prey(
    state: &mut WorldState,
    wolf_actions: [Action; 2],
    prey_action: Action,
    params: &WolfpackParams,
) -> Result<StepOutcome, GameError> {
    let joint = [wolf_actions[0], wolf_actions[1], prey_action];
    state.begin_frame(&joint)?;
    let mut out = StepOutcome::default();

    for shooter in 0..2 {
        if wolf_actions[shooter] == Action::UseBeam && state.entities[shooter].active {
            if let Some(target) = cast_beam(state, shooter)?.hit {
                out.events.push(Event::BeamHit { shooter, target });
            }
        }
    }

    if let Some(prey) = prey_index(state).filter(|&p| state.entities[p].active) {
        let at = state.entities[prey].position;
        let dist = |w: usize| {
            let e = &state.entities[w];
            e.active.then(|| e.position.l1(at))
        };
        let catcher = (0..2).find(|&w| dist(w).is_some_and(|d| d <= 1));
        if let Some(catcher) = catcher {
            let in_radius: Vec<usize> = (0..2)
                .filter(|&w| dist(w).is_some_and(|d| d <= 1 || d <= params.capture_radius))
                .collect();
            let reward = if in_radius.len() == 2 {
                params.r_team
            } else {
                params.r_lone
            };
            for &w in &in_radius {
                out.rewards[w] = reward;
            }
            out.events.push(Event::Capture {
                catcher,
                wolves: in_radius.len() as u8,
            });
            let spawns: Vec<Position> = state.map().spawns_of(SpawnRole::Prey).collect();
            let to = spawns[state.rng.random_range(0..spawns.len())];
            state.respawn_at(prey, to);
        }
    }

    state.end_frame();
    Ok(out)
}
