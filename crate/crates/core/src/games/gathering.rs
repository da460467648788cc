use serde::{Deserialize, Serialize};

use super::{Event, GameError, StepOutcome};
use crate::engine::{cast_beam, Action, EntityKind, WorldState};

/// Hits needed within one life to be tagged out.
pub const HITS_TO_TAG: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatheringParams {
    /// Frames before a collected apple reappears.
    pub n_apple: u32,
    /// Frames a tagged player stays out of the game.
    pub n_tagged: u32,
}

impl Default for GatheringParams {
    fn default() -> Self {
        GatheringParams {
            n_apple: 10,
            n_tagged: 5,
        }
    }
}

impl GatheringParams {
    pub fn validate(&self) -> Result<(), GameError> {
        if self.n_apple < 1 || self.n_tagged < 1 {
            return Err(GameError::InvalidParams(
                "n_apple and n_tagged must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One Gathering frame: moves, beams from the post-move poses, tagging,
/// apple pickup, then timers.
///
/// A player that moves onto a stocked apple site collects it for a reward
/// of 1; an apple that reappears under a standing player waits. A player
/// struck a second time since its last spawn is removed for `n_tagged`
/// frames; tagging pays nobody.
pub fn gathering_step(
    state: &mut WorldState,
    joint: &[Action],
    params: &GatheringParams,
) -> Result<StepOutcome, GameError> {
    let before = [0, 1].map(|i| state.entities[i].position);
    state.begin_frame(joint)?;
    let mut out = StepOutcome::default();

    for shooter in 0..joint.len() {
        if joint[shooter] == Action::UseBeam && state.entities[shooter].active {
            let shot = cast_beam(state, shooter)?;
            if let Some(target) = shot.hit {
                out.events.push(Event::BeamHit { shooter, target });
            }
        }
    }
    for shooter in 0..joint.len() {
        let Some(target) = state.beams().iter().find(|b| b.shooter == shooter).and_then(|b| b.hit)
        else {
            continue;
        };
        let t = &state.entities[target];
        if t.active && t.kind == EntityKind::Player && t.hit_count >= HITS_TO_TAG {
            state.remove_entity(target, params.n_tagged);
            out.events.push(Event::Tagged { shooter, target });
        }
    }

    for site in 0..state.apple_sites().len() {
        if !state.apple_present(site) {
            continue;
        }
        let at = state.apple_sites()[site];
        if let Some(agent) = state.occupant(at) {
            if agent < 2 && before[agent] != at {
                out.rewards[agent] += 1.0;
                state.take_apple(site, params.n_apple);
                out.events.push(Event::AppleCollected { agent, site });
            }
        }
    }

    state.end_frame();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{load_map, GameKind, Orientation, Position};

    const MAP: &str = "#########\n#1.A....#\n#.......#\n#......2#\n#########";

    fn world() -> WorldState {
        WorldState::new(Arc::new(load_map(MAP).unwrap()), GameKind::Gathering, 3).unwrap()
    }

    const P: GatheringParams = GatheringParams {
        n_apple: 4,
        n_tagged: 6,
    };

    #[test]
    fn stepping_onto_apple_pays_one() {
        let mut w = world();
        w.entities[0].position = Position::new(2, 1);
        w.entities[0].orientation = Orientation::East;
        let out = gathering_step(&mut w, &[Action::StepForward, Action::StandStill], &P).unwrap();
        assert_eq!(out.rewards, [1.0, 0.0]);
        assert_eq!(w.apple_timers[0], P.n_apple);
        assert!(matches!(out.events[..], [Event::AppleCollected { agent: 0, site: 0 }]));
    }

    #[test]
    fn idle_frame_changes_only_step() {
        let mut w = world();
        let before = w.clone();
        let out = gathering_step(&mut w, &[Action::StandStill; 2], &P).unwrap();
        assert_eq!(out.rewards, [0.0, 0.0]);
        assert!(out.events.is_empty());
        assert_eq!(w.entities, before.entities);
        assert_eq!(w.apple_timers, before.apple_timers);
        assert_eq!(w.step, before.step + 1);
    }

    #[test]
    fn second_hit_tags_without_reward() {
        let mut w = world();
        w.entities[0].orientation = Orientation::South;
        w.entities[1].position = Position::new(1, 3);
        w.entities[1].hit_count = 1;
        let out = gathering_step(&mut w, &[Action::UseBeam, Action::StandStill], &P).unwrap();
        assert_eq!(out.rewards, [0.0, 0.0]);
        assert!(!w.entities[1].active);
        assert_eq!(w.entities[1].removal_timer, P.n_tagged);
        assert_eq!(w.entities[1].hit_count, 0);
        assert!(out
            .events
            .contains(&Event::Tagged { shooter: 0, target: 1 }));
    }

    #[test]
    fn single_hit_does_not_tag() {
        let mut w = world();
        w.entities[0].orientation = Orientation::South;
        w.entities[1].position = Position::new(1, 3);
        gathering_step(&mut w, &[Action::UseBeam, Action::StandStill], &P).unwrap();
        assert!(w.entities[1].active);
        assert_eq!(w.entities[1].hit_count, 1);
    }

    #[test]
    fn apple_returns_after_exactly_n_frames() {
        let mut w = world();
        w.entities[0].position = Position::new(2, 1);
        w.entities[0].orientation = Orientation::East;
        let out = gathering_step(&mut w, &[Action::StepForward, Action::StandStill], &P).unwrap();
        assert_eq!(out.rewards[0], 1.0);
        gathering_step(&mut w, &[Action::StepBackward, Action::StandStill], &P).unwrap();
        // absent during frames 1..=n_apple
        for k in 2..=P.n_apple {
            assert!(!w.apple_present(0), "back early at frame {k}");
            gathering_step(&mut w, &[Action::StandStill; 2], &P).unwrap();
        }
        assert!(w.apple_present(0));
        let out = gathering_step(&mut w, &[Action::StepForward, Action::StandStill], &P).unwrap();
        assert_eq!(out.rewards[0], 1.0);
    }

    #[test]
    fn standing_player_does_not_collect_respawned_apple() {
        let mut w = world();
        w.entities[0].position = Position::new(2, 1);
        w.entities[0].orientation = Orientation::East;
        gathering_step(&mut w, &[Action::StepForward, Action::StandStill], &P).unwrap();
        for _ in 0..3 * P.n_apple {
            let out = gathering_step(&mut w, &[Action::StandStill; 2], &P).unwrap();
            assert_eq!(out.rewards[0], 0.0);
        }
        assert!(w.apple_present(0));
        gathering_step(&mut w, &[Action::StepBackward, Action::StandStill], &P).unwrap();
        let out = gathering_step(&mut w, &[Action::StepForward, Action::StandStill], &P).unwrap();
        assert_eq!(out.rewards[0], 1.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GatheringParams { n_apple: 0, n_tagged: 1 }.validate().is_err());
        assert!(P.validate().is_ok());
    }
}
