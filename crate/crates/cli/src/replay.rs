//! ASCII rendering of recorded or freshly played episodes.

use ssdlab_core::engine::{EntityKind, Orientation, Terrain, WorldState};
use ssdlab_core::games::EpisodeLog;
use ssdlab_core::harness::{Environment, HarnessError};

/// The whole map as text: `#` wall, `.` floor, `a` apple, `1`/`2` players,
/// `p` prey, `|`/`-` beam cells. Out-of-play entities are not drawn.
pub fn render_ascii(state: &WorldState) -> String {
    let map = state.map();
    let (w, h) = (map.width(), map.height());
    let mut grid: Vec<Vec<char>> = (0..h)
        .map(|y| {
            (0..w)
                .map(|x| {
                    let p = ssdlab_core::Position::new(x as i32, y as i32);
                    match map.terrain(p) {
                        Some(Terrain::Wall) => '#',
                        _ => '.',
                    }
                })
                .collect()
        })
        .collect();
    for (i, site) in state.apple_sites().iter().enumerate() {
        if state.apple_present(i) {
            grid[site.y as usize][site.x as usize] = 'a';
        }
    }
    for beam in state.beams() {
        let glyph = match state.entities[beam.shooter].orientation {
            Orientation::North | Orientation::South => '|',
            Orientation::East | Orientation::West => '-',
        };
        for c in &beam.cells {
            grid[c.y as usize][c.x as usize] = glyph;
        }
    }
    for e in state.entities.iter().filter(|e| e.active) {
        let glyph = match e.kind {
            EntityKind::Player => char::from(b'1' + e.id as u8),
            EntityKind::Prey => 'p',
        };
        grid[e.position.y as usize][e.position.x as usize] = glyph;
    }
    let mut out = String::with_capacity((w + 1) * h);
    for row in grid {
        out.extend(row);
        out.push('\n');
    }
    out
}

fn frame_block(t: usize, state: &WorldState) -> String {
    format!("frame {t}\n{}\n", render_ascii(state))
}

/// Re-plays a log on a fresh world seeded from the log and returns one
/// frame per logged step, showing the state after that step.
pub fn replay_log(template: &Environment, log: &EpisodeLog) -> Result<Vec<String>, HarnessError> {
    let mut env = template.clone();
    env.reset(log.seed);
    let mut frames = Vec::with_capacity(log.frames.len());
    for (t, f) in log.frames.iter().enumerate() {
        env.step_recorded(&f.actions)?;
        frames.push(frame_block(t, env.state()));
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use ssdlab_core::engine::{load_map, GameKind, WorldState};
    use ssdlab_core::games::{GameRules, GatheringParams};
    use ssdlab_core::Action;

    use super::*;

    const MAP: &str = "#####\n#1.A#\n#..2#\n#####\n";

    fn world() -> WorldState {
        WorldState::new(Arc::new(load_map(MAP).unwrap()), GameKind::Gathering, 0).unwrap()
    }

    #[test]
    fn draws_map_alphabet_and_entities() {
        assert_eq!(render_ascii(&world()), "#####\n#1.a#\n#..2#\n#####\n");
    }

    #[test]
    fn tagged_player_is_not_drawn() {
        let mut w = world();
        w.entities[1].active = false;
        assert_eq!(render_ascii(&w), "#####\n#1.a#\n#...#\n#####\n");
    }

    #[test]
    fn beams_use_direction_glyphs() {
        let map = Arc::new(load_map(MAP).unwrap());
        let env = Environment::new(GameRules::Gathering(GatheringParams::default()), map, 0).unwrap();
        let mut log = EpisodeLog::new(0, 0.99);
        log.push(ssdlab_core::games::FrameRecord {
            actions: vec![Action::RotateRight, Action::StandStill],
            rewards: [0.0; 2],
            active: [true; 2],
            events: vec![],
        });
        log.push(ssdlab_core::games::FrameRecord {
            actions: vec![Action::UseBeam, Action::RotateLeft],
            rewards: [0.0; 2],
            active: [true; 2],
            events: vec![],
        });
        log.push(ssdlab_core::games::FrameRecord {
            actions: vec![Action::StandStill, Action::UseBeam],
            rewards: [0.0; 2],
            active: [true; 2],
            events: vec![],
        });
        let frames = replay_log(&env, &log).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[1], "frame 1\n#####\n#1--#\n#..2#\n#####\n\n");
        assert_eq!(frames[2], "frame 2\n#####\n#1.a#\n#--2#\n#####\n\n");
    }
}
