use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Action, EngineError, GameKind, GridMap, Orientation, Position, SpawnRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Player,
    Prey,
}

/// How the two players see each other: rivals in Gathering, pack mates in
/// Wolfpack. Only affects rendering colours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Opponents,
    Teammates,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityState {
    pub id: usize,
    pub kind: EntityKind,
    pub position: Position,
    pub orientation: Orientation,
    pub active: bool,
    /// Frames left before an inactive entity respawns.
    pub removal_timer: u32,
    /// Beam hits taken since the last (re)spawn.
    pub hit_count: u32,
    pub spawn: Position,
}

impl EntityState {
    fn new(id: usize, kind: EntityKind, spawn: Position) -> Self {
        EntityState {
            id,
            kind,
            position: spawn,
            orientation: Orientation::North,
            active: true,
            removal_timer: 0,
            hit_count: 0,
            spawn,
        }
    }
}

/// One beam fired during the current frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamShot {
    pub shooter: usize,
    /// Cells the beam crossed, nearest first, including the struck entity's cell.
    pub cells: Vec<Position>,
    pub hit: Option<usize>,
}

/// Complete simulation state. Cloning is cheap apart from the entity list;
/// the map is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    map: Arc<GridMap>,
    apple_sites: Arc<[Position]>,
    pub entities: Vec<EntityState>,
    /// Frames until each apple site (in map order) is stocked again; 0 = present.
    pub apple_timers: Vec<u32>,
    pub step: u64,
    pub rng: ChaCha8Rng,
    pub relation: Relation,
    beams: Vec<BeamShot>,
    fresh_removals: Vec<bool>,
    fresh_apples: Vec<bool>,
}

impl WorldState {
    /// Builds the initial state: both players at their spawns facing north,
    /// all apples present, and for Wolfpack a prey at a randomly chosen prey
    /// spawn.
    pub fn new(map: Arc<GridMap>, kind: GameKind, seed: u64) -> Result<Self, super::MapError> {
        map.require_roles(kind)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1 = map.spawn_of(SpawnRole::Player1).expect("checked");
        let p2 = map.spawn_of(SpawnRole::Player2).expect("checked");
        let mut entities = vec![
            EntityState::new(0, EntityKind::Player, p1),
            EntityState::new(1, EntityKind::Player, p2),
        ];
        if kind == GameKind::Wolfpack {
            let spawns: Vec<Position> = map
                .spawns_of(SpawnRole::Prey)
                .filter(|p| *p != p1 && *p != p2)
                .collect();
            let at = if spawns.is_empty() {
                return Err(super::MapError::MissingSpawn(SpawnRole::Prey));
            } else {
                use rand::Rng;
                spawns[rng.random_range(0..spawns.len())]
            };
            entities.push(EntityState::new(2, EntityKind::Prey, at));
        }
        let apple_sites: Arc<[Position]> = map.apple_sites().into();
        let relation = match kind {
            GameKind::Gathering => Relation::Opponents,
            GameKind::Wolfpack => Relation::Teammates,
        };
        let n_ent = entities.len();
        let n_apples = apple_sites.len();
        Ok(WorldState {
            map,
            apple_timers: vec![0; n_apples],
            apple_sites,
            entities,
            step: 0,
            rng,
            relation,
            beams: Vec::new(),
            fresh_removals: vec![false; n_ent],
            fresh_apples: vec![false; n_apples],
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn shared_map(&self) -> Arc<GridMap> {
        Arc::clone(&self.map)
    }

    pub fn apple_sites(&self) -> &[Position] {
        &self.apple_sites
    }

    pub fn apple_present(&self, site: usize) -> bool {
        self.apple_timers[site] == 0
    }

    /// Beams fired during the most recent frame.
    pub fn beams(&self) -> &[BeamShot] {
        &self.beams
    }

    pub fn entity(&self, id: usize) -> Result<&EntityState, EngineError> {
        self.entities.get(id).ok_or(EngineError::NoSuchEntity(id))
    }

    /// Index of the active entity standing on `p`, if any.
    pub fn occupant(&self, p: Position) -> Option<usize> {
        self.entities
            .iter()
            .find(|e| e.active && e.position == p)
            .map(|e| e.id)
    }

    /// True when an entity could stand on `p`: in bounds, floor, unoccupied.
    pub fn is_free(&self, p: Position) -> bool {
        self.map.is_floor(p) && self.occupant(p).is_none()
    }

    /// Starts a frame: validates arity, clears last frame's beams and
    /// resolves all rotations and moves simultaneously.
    ///
    /// Moves into walls or off the map are cancelled. Two movers aiming at
    /// the same cell are both cancelled, as are swaps and moves into a cell
    /// whose occupant ends the frame there. Cancellation repeats until no
    /// conflict remains.
    pub fn begin_frame(&mut self, joint: &[Action]) -> Result<(), EngineError> {
        if joint.len() != self.entities.len() {
            return Err(EngineError::ArityMismatch {
                expected: self.entities.len(),
                got: joint.len(),
            });
        }
        self.beams.clear();

        let n = self.entities.len();
        let mut target: Vec<Position> = Vec::with_capacity(n);
        let mut moving = vec![false; n];
        for (i, (e, &a)) in self.entities.iter_mut().zip(joint).enumerate() {
            target.push(e.position);
            if !e.active {
                continue;
            }
            match a {
                Action::RotateLeft => e.orientation = e.orientation.rotate_left(),
                Action::RotateRight => e.orientation = e.orientation.rotate_right(),
                _ => {
                    if let Some((dx, dy)) = a.displacement(e.orientation) {
                        let to = e.position.offset(dx, dy);
                        if self.map.is_floor(to) {
                            target[i] = to;
                            moving[i] = true;
                        }
                    }
                }
            }
        }

        loop {
            let mut changed = false;
            for i in 0..n {
                if !self.entities[i].active {
                    continue;
                }
                for j in (i + 1)..n {
                    if !self.entities[j].active {
                        continue;
                    }
                    let clash = target[i] == target[j];
                    let swap = moving[i]
                        && moving[j]
                        && target[i] == self.entities[j].position
                        && target[j] == self.entities[i].position;
                    if clash || swap {
                        for k in [i, j] {
                            if moving[k] {
                                moving[k] = false;
                                target[k] = self.entities[k].position;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        for (e, t) in self.entities.iter_mut().zip(target) {
            e.position = t;
        }
        Ok(())
    }

    /// Takes an entity out of play for `frames` frames, counted from the
    /// next frame. Its hit counter is cleared.
    pub fn remove_entity(&mut self, id: usize, frames: u32) {
        let e = &mut self.entities[id];
        e.active = false;
        e.removal_timer = frames.max(1);
        e.hit_count = 0;
        self.fresh_removals[id] = true;
    }

    /// Empties an apple site for `frames` frames, counted from the next frame.
    pub fn take_apple(&mut self, site: usize, frames: u32) {
        self.apple_timers[site] = frames.max(1);
        self.fresh_apples[site] = true;
    }

    /// Moves an entity to `at` (or the nearest free floor cell) as if newly spawned.
    pub fn respawn_at(&mut self, id: usize, at: Position) {
        let at = self.nearest_free(at, id).unwrap_or(at);
        let e = &mut self.entities[id];
        e.position = at;
        e.orientation = Orientation::North;
        e.active = true;
        e.removal_timer = 0;
        e.hit_count = 0;
    }

    /// Breadth-first search from `from` for a floor cell not held by any
    /// active entity other than `ignore`.
    fn nearest_free(&self, from: Position, ignore: usize) -> Option<Position> {
        let blocked = |p: Position| {
            self.entities
                .iter()
                .any(|e| e.id != ignore && e.active && e.position == p)
        };
        if self.map.is_floor(from) && !blocked(from) {
            return Some(from);
        }
        let w = self.map.width();
        let mut seen = vec![false; w * self.map.height()];
        let mut queue = VecDeque::from([from]);
        if self.map.in_bounds(from) {
            seen[from.y as usize * w + from.x as usize] = true;
        }
        while let Some(p) = queue.pop_front() {
            for o in Orientation::ALL {
                let (dx, dy) = o.forward();
                let q = p.offset(dx, dy);
                if !self.map.is_floor(q) {
                    continue;
                }
                let k = q.y as usize * w + q.x as usize;
                if seen[k] {
                    continue;
                }
                seen[k] = true;
                if !blocked(q) {
                    return Some(q);
                }
                queue.push_back(q);
            }
        }
        None
    }

    /// Finishes a frame: decrements removal and apple timers (except those
    /// started this frame), respawns entities whose timer expired and
    /// advances the step counter.
    pub fn end_frame(&mut self) {
        for i in 0..self.entities.len() {
            if self.fresh_removals[i] {
                self.fresh_removals[i] = false;
                continue;
            }
            let e = &mut self.entities[i];
            if !e.active && e.removal_timer > 0 {
                e.removal_timer -= 1;
                if e.removal_timer == 0 {
                    let spawn = e.spawn;
                    self.respawn_at(i, spawn);
                }
            }
        }
        for (t, fresh) in self.apple_timers.iter_mut().zip(&mut self.fresh_apples) {
            if *fresh {
                *fresh = false;
            } else if *t > 0 {
                *t -= 1;
            }
        }
        self.step += 1;
    }
}

/// Advances the world one frame with no game rules: moves, rotations and
/// timers only. Beam actions are ignored.
pub fn apply_kinematics(state: &mut WorldState, joint: &[Action]) -> Result<(), EngineError> {
    state.begin_frame(joint)?;
    state.end_frame();
    Ok(())
}

/// Fires `shooter`'s beam along its facing. The beam travels from the cell
/// ahead until a wall, the map edge or the first active entity, which is
/// struck and has its hit counter incremented.
pub fn cast_beam(state: &mut WorldState, shooter: usize) -> Result<BeamShot, EngineError> {
    let e = state.entity(shooter)?;
    if !e.active {
        return Err(EngineError::InactiveShooter(shooter));
    }
    let (dx, dy) = e.orientation.forward();
    let mut p = e.position.offset(dx, dy);
    let mut cells = Vec::new();
    let mut hit = None;
    while state.map.is_floor(p) {
        cells.push(p);
        if let Some(id) = state.occupant(p) {
            hit = Some(id);
            break;
        }
        p = p.offset(dx, dy);
    }
    if let Some(id) = hit {
        state.entities[id].hit_count += 1;
    }
    let shot = BeamShot {
        shooter,
        cells,
        hit,
    };
    state.beams.push(shot.clone());
    Ok(shot)
}
