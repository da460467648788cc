//! Deterministic grid-world core shared by every game: maps, entity
//! kinematics, beam casting and egocentric observation rendering.

mod map;
mod observation;
mod world;

use std::fmt;

use thiserror::Error;

pub use map::{
    load_map, load_map_for, GameKind, GridMap, Spawn, SpawnRole, Terrain, DEFAULT_GATHERING_MAP,
    DEFAULT_WOLFPACK_MAP,
};
pub use observation::{
    render_observation, Observation, Pixel, OBS_AHEAD, OBS_CHANNELS, OBS_COLS, OBS_LEN, OBS_ROWS,
    OBS_SIDE,
};
pub use world::{
    apply_kinematics, cast_beam, BeamShot, EntityKind, EntityState, Relation, WorldState,
};

/// A cell coordinate. `x` is the column, `y` the row; `y` grows southward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Position { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Position::new(self.x + dx, self.y + dy)
    }

    pub fn l1(self, other: Position) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Orientation {
    #[default]
    North,
    East,
    South,
    West,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::North,
        Orientation::East,
        Orientation::South,
        Orientation::West,
    ];

    /// Unit step `(dx, dy)` in the facing direction.
    pub fn forward(self) -> (i32, i32) {
        match self {
            Orientation::North => (0, -1),
            Orientation::East => (1, 0),
            Orientation::South => (0, 1),
            Orientation::West => (-1, 0),
        }
    }

    /// Unit step toward the entity's right hand.
    pub fn right(self) -> (i32, i32) {
        self.rotate_right().forward()
    }

    pub fn rotate_right(self) -> Self {
        match self {
            Orientation::North => Orientation::East,
            Orientation::East => Orientation::South,
            Orientation::South => Orientation::West,
            Orientation::West => Orientation::North,
        }
    }

    pub fn rotate_left(self) -> Self {
        match self {
            Orientation::North => Orientation::West,
            Orientation::West => Orientation::South,
            Orientation::South => Orientation::East,
            Orientation::East => Orientation::North,
        }
    }
}

/// The eight agent-centred actions. The discriminant is the stable wire
/// encoding and the index into a Q-value vector.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[repr(u8)]
pub enum Action {
    StepForward = 0,
    StepBackward = 1,
    StepLeft = 2,
    StepRight = 3,
    RotateLeft = 4,
    RotateRight = 5,
    UseBeam = 6,
    StandStill = 7,
}

impl Action {
    pub const COUNT: usize = 8;

    pub const ALL: [Action; Action::COUNT] = [
        Action::StepForward,
        Action::StepBackward,
        Action::StepLeft,
        Action::StepRight,
        Action::RotateLeft,
        Action::RotateRight,
        Action::UseBeam,
        Action::StandStill,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    /// Displacement of a step action for an entity facing `facing`;
    /// `None` for actions that do not translate.
    pub fn displacement(self, facing: Orientation) -> Option<(i32, i32)> {
        let (fx, fy) = facing.forward();
        let (rx, ry) = facing.right();
        match self {
            Action::StepForward => Some((fx, fy)),
            Action::StepBackward => Some((-fx, -fy)),
            Action::StepLeft => Some((-rx, -ry)),
            Action::StepRight => Some((rx, ry)),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("unknown map character {ch:?} at {position}")]
    UnknownChar { ch: char, position: Position },
    #[error("row {row} differs in length from the first row")]
    RaggedRows { row: usize },
    #[error("map has no {0} spawn")]
    MissingSpawn(SpawnRole),
    #[error("map declares more than one {0} spawn")]
    DuplicateSpawn(SpawnRole),
    #[error("map is empty")]
    EmptyMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("expected {expected} actions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("entity {0} cannot fire: it is not active")]
    InactiveShooter(usize),
    #[error("entity {0} is not active and has no view")]
    InactiveAgent(usize),
    #[error("no entity with index {0}")]
    NoSuchEntity(usize),
}
