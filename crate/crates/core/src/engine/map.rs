use std::fmt;

use super::{MapError, Position};

/// Terrain of a single cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terrain {
    Wall,
    Floor,
}

/// Role carried by a spawn marker in a map document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpawnRole {
    Player1,
    Player2,
    Prey,
    Apple,
}

impl SpawnRole {
    pub fn marker(self) -> char {
        match self {
            SpawnRole::Player1 => '1',
            SpawnRole::Player2 => '2',
            SpawnRole::Prey => 'P',
            SpawnRole::Apple => 'A',
        }
    }
}

impl fmt::Display for SpawnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SpawnRole::Player1 => "player1",
            SpawnRole::Player2 => "player2",
            SpawnRole::Prey => "prey",
            SpawnRole::Apple => "apple",
        };
        f.write_str(name)
    }
}

/// Which game a map is meant to host; used for role validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Gathering,
    Wolfpack,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameKind::Gathering => f.write_str("gathering"),
            GameKind::Wolfpack => f.write_str("wolfpack"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spawn {
    pub role: SpawnRole,
    pub position: Position,
}

/// A static grid of wall and floor cells plus role-tagged spawn points.
///
/// Cells are stored row-major; `(x, y)` is column then row with `y` growing
/// downward, so north is `-y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Terrain>,
    spawns: Vec<Spawn>,
}

/// The shipped 33x11 Gathering arena.
pub const DEFAULT_GATHERING_MAP: &str = include_str!("../../maps/gathering.txt");
/// The shipped 20x20 obstructed Wolfpack arena.
pub const DEFAULT_WOLFPACK_MAP: &str = include_str!("../../maps/wolfpack.txt");

/// Parses a map document.
///
/// Only the alphabet and rectangular shape are checked here; use
/// [`GridMap::require_roles`] (or [`load_map_for`]) for per-game spawn
/// requirements.
pub fn load_map(text: &str) -> Result<GridMap, MapError> {
    let rows: Vec<&str> = text
        .split('\n')
        .map(|r| r.strip_suffix('\r').unwrap_or(r))
        .collect();
    // a single trailing newline is allowed
    let rows: &[&str] = match rows.split_last() {
        Some((&"", rest)) => rest,
        _ => &rows,
    };
    if rows.is_empty() || rows[0].is_empty() {
        return Err(MapError::EmptyMap);
    }
    let width = rows[0].chars().count();
    let height = rows.len();
    let mut cells = Vec::with_capacity(width * height);
    let mut spawns = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(MapError::RaggedRows { row: y });
        }
        for (x, ch) in row.chars().enumerate() {
            let position = Position::new(x as i32, y as i32);
            let role = match ch {
                '#' => {
                    cells.push(Terrain::Wall);
                    continue;
                }
                '.' => None,
                '1' => Some(SpawnRole::Player1),
                '2' => Some(SpawnRole::Player2),
                'P' => Some(SpawnRole::Prey),
                'A' => Some(SpawnRole::Apple),
                _ => return Err(MapError::UnknownChar { ch, position }),
            };
            cells.push(Terrain::Floor);
            if let Some(role) = role {
                if matches!(role, SpawnRole::Player1 | SpawnRole::Player2)
                    && spawns.iter().any(|s: &Spawn| s.role == role)
                {
                    return Err(MapError::DuplicateSpawn(role));
                }
                spawns.push(Spawn { role, position });
            }
        }
    }
    Ok(GridMap {
        width,
        height,
        cells,
        spawns,
    })
}

/// Parses a map document and checks the spawn roles `kind` needs.
pub fn load_map_for(text: &str, kind: GameKind) -> Result<GridMap, MapError> {
    let map = load_map(text)?;
    map.require_roles(kind)?;
    Ok(map)
}

impl GridMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    /// Terrain at `p`, or `None` outside the map.
    pub fn terrain(&self, p: Position) -> Option<Terrain> {
        if self.in_bounds(p) {
            Some(self.cells[p.y as usize * self.width + p.x as usize])
        } else {
            None
        }
    }

    pub fn is_floor(&self, p: Position) -> bool {
        self.terrain(p) == Some(Terrain::Floor)
    }

    pub fn spawns(&self) -> &[Spawn] {
        &self.spawns
    }

    pub fn spawns_of(&self, role: SpawnRole) -> impl Iterator<Item = Position> + '_ {
        self.spawns
            .iter()
            .filter(move |s| s.role == role)
            .map(|s| s.position)
    }

    pub fn apple_sites(&self) -> Vec<Position> {
        self.spawns_of(SpawnRole::Apple).collect()
    }

    pub fn spawn_of(&self, role: SpawnRole) -> Option<Position> {
        self.spawns_of(role).next()
    }

    /// Gathering needs both player spawns and at least one apple site;
    /// Wolfpack needs both wolf spawns and at least one prey spawn.
    pub fn require_roles(&self, kind: GameKind) -> Result<(), MapError> {
        let needed: &[SpawnRole] = match kind {
            GameKind::Gathering => &[SpawnRole::Player1, SpawnRole::Player2, SpawnRole::Apple],
            GameKind::Wolfpack => &[SpawnRole::Player1, SpawnRole::Player2, SpawnRole::Prey],
        };
        for &role in needed {
            if self.spawn_of(role).is_none() {
                return Err(MapError::MissingSpawn(role));
            }
        }
        Ok(())
    }

    /// Renders the map back into the document alphabet.
    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<char>> = (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| match self.cells[y * self.width + x] {
                        Terrain::Wall => '#',
                        Terrain::Floor => '.',
                    })
                    .collect()
            })
            .collect();
        for s in &self.spawns {
            grid[s.position.y as usize][s.position.x as usize] = s.role.marker();
        }
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in grid {
            out.extend(row);
            out.push('\n');
        }
        out
    }
}
