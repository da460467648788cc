//! Independent reference implementations shared by the property and
//! acceptance tests. None of these call into the code paths they check.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssdlab_core::engine::{
    cast_beam, load_map, EntityKind, Observation, Orientation, Pixel, Position, Relation, Terrain,
    WorldState, OBS_COLS, OBS_ROWS,
};
use ssdlab_core::GameKind;

/// The four dilemma conditions written out directly.
pub fn ssd_oracle(r: f64, p: f64, s: f64, t: f64) -> [bool; 4] {
    [r > p, r > s, 2.0 * r > t + s, t > r || p > s]
}

/// A random walled map with random interior walls, both player spawns, a
/// prey spawn and a few apple sites.
pub fn random_map_text(rng: &mut ChaCha8Rng, w: usize, h: usize) -> String {
    let mut g = vec![vec!['.'; w]; h];
    for (y, row) in g.iter_mut().enumerate() {
        for (x, c) in row.iter_mut().enumerate() {
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 || rng.random_bool(0.15) {
                *c = '#';
            }
        }
    }
    let mut free: Vec<(usize, usize)> = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            free.push((x, y));
        }
    }
    // shuffle and hand out markers
    for i in (1..free.len()).rev() {
        let j = rng.random_range(0..=i);
        free.swap(i, j);
    }
    let markers = ['1', '2', 'P', 'A', 'A', 'A', 'A', 'A', 'A'];
    for (m, &(x, y)) in markers.iter().zip(&free) {
        g[y][x] = *m;
    }
    g.into_iter()
        .map(|r| r.into_iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

fn floor_cells(state: &WorldState) -> Vec<Position> {
    let m = state.map();
    let mut v = Vec::new();
    for y in 0..m.height() as i32 {
        for x in 0..m.width() as i32 {
            let p = Position::new(x, y);
            if m.is_floor(p) {
                v.push(p);
            }
        }
    }
    v
}

/// A world in an arbitrary reachable-looking configuration: random poses,
/// activity, apple stock and beams fired this frame.
pub fn random_world(seed: u64) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(6..=20);
    let h = rng.random_range(6..=20);
    let text = random_map_text(&mut rng, w, h);
    let kind = if rng.random_bool(0.5) {
        GameKind::Gathering
    } else {
        GameKind::Wolfpack
    };
    let map = Arc::new(load_map(&text).expect("generated map is valid"));
    let mut state = WorldState::new(map, kind, seed).expect("roles present");
    let mut cells = floor_cells(&state);
    for i in (1..cells.len()).rev() {
        let j = rng.random_range(0..=i);
        cells.swap(i, j);
    }
    let n = state.entities.len();
    for (i, p) in cells.iter().take(n).enumerate() {
        let e = &mut state.entities[i];
        e.position = *p;
        e.orientation = Orientation::ALL[rng.random_range(0..4)];
        e.active = i == 0 || rng.random_bool(0.8);
    }
    for t in state.apple_timers.iter_mut() {
        *t = if rng.random_bool(0.6) { 0 } else { rng.random_range(1..10) };
    }
    for shooter in 0..2 {
        if state.entities[shooter].active && rng.random_bool(0.4) {
            cast_beam(&mut state, shooter).expect("active shooter");
        }
    }
    state
}

/// Paints the whole map into an RGB-less palette image, rotates the image
/// so the agent faces up, then crops the window. Cells outside the map are
/// background.
pub fn reference_render(state: &WorldState, agent: usize) -> Observation {
    let m = state.map();
    let (w, h) = (m.width(), m.height());
    let mut img = vec![vec![Pixel::Background; w]; h];
    for (y, row) in img.iter_mut().enumerate() {
        for (x, px) in row.iter_mut().enumerate() {
            if m.terrain(Position::new(x as i32, y as i32)) == Some(Terrain::Wall) {
                *px = Pixel::Wall;
            }
        }
    }
    for (i, p) in state.apple_sites().iter().enumerate() {
        if state.apple_timers[i] == 0 {
            img[p.y as usize][p.x as usize] = Pixel::Apple;
        }
    }
    for b in state.beams() {
        for c in &b.cells {
            img[c.y as usize][c.x as usize] = Pixel::Beam;
        }
    }
    for e in &state.entities {
        if !e.active {
            continue;
        }
        img[e.position.y as usize][e.position.x as usize] = if e.id == agent {
            Pixel::SelfAgent
        } else if e.kind == EntityKind::Prey {
            Pixel::Prey
        } else if state.relation == Relation::Teammates {
            Pixel::Teammate
        } else {
            Pixel::Opponent
        };
    }

    let me = &state.entities[agent];
    let turns = match me.orientation {
        Orientation::North => 0,
        Orientation::East => 1,
        Orientation::South => 2,
        Orientation::West => 3,
    };
    // track the agent through each counter-clockwise quarter turn
    let (mut ax, mut ay) = (me.position.x as usize, me.position.y as usize);
    for _ in 0..turns {
        let ih = img.len();
        let iw = img[0].len();
        let mut rot = vec![vec![Pixel::Background; ih]; iw];
        for (y, row) in img.iter().enumerate() {
            for (x, &px) in row.iter().enumerate() {
                rot[iw - 1 - x][y] = px;
            }
        }
        let (nx, ny) = (ay, iw - 1 - ax);
        ax = nx;
        ay = ny;
        img = rot;
    }

    let mut obs = Observation::blank(agent);
    for r in 0..OBS_ROWS {
        for c in 0..OBS_COLS {
            let y = ay as i64 - (OBS_ROWS as i64 - 1) + r as i64;
            let x = ax as i64 - (OBS_COLS as i64 / 2) + c as i64;
            if y >= 0 && x >= 0 && (y as usize) < img.len() && (x as usize) < img[0].len() {
                obs.set_pixel(r, c, img[y as usize][x as usize]);
            }
        }
    }
    obs
}

/// A 5-state chain with actions left (0) and right (1). Moving right from
/// the last state pays 1 and stays; moving left from the first pays 0.2.
pub struct ChainMdp;

impl ChainMdp {
    pub const STATES: usize = 5;
    pub const ACTIONS: usize = 2;

    pub fn step(s: usize, a: usize) -> (usize, f64) {
        match (s, a) {
            (0, 0) => (0, 0.2),
            (s, 0) => (s - 1, 0.0),
            (4, _) => (4, 1.0),
            (s, _) => (s + 1, 0.0),
        }
    }
}

/// Q* of the chain by value iteration to machine precision.
pub fn value_iteration(gamma: f64) -> [[f64; 2]; 5] {
    let mut q = [[0.0f64; 2]; 5];
    loop {
        let mut next = [[0.0; 2]; 5];
        let mut delta: f64 = 0.0;
        for s in 0..ChainMdp::STATES {
            for a in 0..ChainMdp::ACTIONS {
                let (s2, r) = ChainMdp::step(s, a);
                next[s][a] = r + gamma * q[s2][0].max(q[s2][1]);
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-14 {
            return q;
        }
    }
}
