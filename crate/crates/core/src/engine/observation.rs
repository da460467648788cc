use super::{EngineError, EntityKind, Position, Relation, Terrain, WorldState};

pub const OBS_CHANNELS: usize = 3;
pub const OBS_ROWS: usize = 16;
pub const OBS_COLS: usize = 21;
/// Cells visible in front of the observer (the observer's own row is extra).
pub const OBS_AHEAD: usize = 15;
/// Cells visible to each side of the observer.
pub const OBS_SIDE: usize = 10;
pub const OBS_LEN: usize = OBS_CHANNELS * OBS_ROWS * OBS_COLS;

/// Palette entry of one observation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum Pixel {
    #[default]
    Background = 0,
    SelfAgent = 1,
    Teammate = 2,
    Opponent = 3,
    Prey = 4,
    Apple = 5,
    Wall = 6,
    Beam = 7,
}

impl Pixel {
    pub const ALL: [Pixel; 8] = [
        Pixel::Background,
        Pixel::SelfAgent,
        Pixel::Teammate,
        Pixel::Opponent,
        Pixel::Prey,
        Pixel::Apple,
        Pixel::Wall,
        Pixel::Beam,
    ];

    pub fn rgb(self) -> [f64; 3] {
        match self {
            Pixel::Background => [0.0, 0.0, 0.0],
            Pixel::SelfAgent => [0.0, 0.0, 1.0],
            Pixel::Teammate => [0.5, 0.75, 1.0],
            Pixel::Opponent => [1.0, 0.0, 0.0],
            Pixel::Prey => [1.0, 1.0, 1.0],
            Pixel::Apple => [0.0, 1.0, 0.0],
            Pixel::Wall => [0.5, 0.5, 0.5],
            Pixel::Beam => [1.0, 1.0, 0.0],
        }
    }

    pub fn from_code(code: u8) -> Option<Pixel> {
        Pixel::ALL.get(code as usize).copied()
    }
}

/// An agent's egocentric 3x16x21 view, stored as palette codes.
///
/// Row 15 is the agent's own row and row 0 the farthest row ahead; column 10
/// is the agent's column with its left side at lower columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub agent_id: usize,
    pixels: Box<[Pixel; OBS_ROWS * OBS_COLS]>,
}

impl std::fmt::Debug for Observation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observation")
            .field("agent_id", &self.agent_id)
            .finish_non_exhaustive()
    }
}

impl Observation {
    /// An all-background view, used for agents that are out of play.
    pub fn blank(agent_id: usize) -> Self {
        Observation {
            agent_id,
            pixels: Box::new([Pixel::Background; OBS_ROWS * OBS_COLS]),
        }
    }

    pub fn pixel(&self, row: usize, col: usize) -> Pixel {
        self.pixels[row * OBS_COLS + col]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, p: Pixel) {
        self.pixels[row * OBS_COLS + col] = p;
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels[..]
    }

    /// Intensity at `(channel, row, col)`.
    pub fn value(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.pixel(row, col).rgb()[channel]
    }

    /// Writes the flattened tensor (channel, row, column order) into `out`.
    pub fn write_tensor(&self, out: &mut [f64]) {
        assert_eq!(out.len(), OBS_LEN);
        let plane = OBS_ROWS * OBS_COLS;
        for (i, p) in self.pixels.iter().enumerate() {
            let [r, g, b] = p.rgb();
            out[i] = r;
            out[plane + i] = g;
            out[2 * plane + i] = b;
        }
    }

    pub fn tensor(&self) -> Vec<f64> {
        let mut out = vec![0.0; OBS_LEN];
        self.write_tensor(&mut out);
        out
    }
}

/// Renders `agent`'s view of `state`, rotated so the agent faces up.
///
/// Painting order (later wins): walls, apples, beam cells fired this frame,
/// entities. Cells outside the map stay background.
pub fn render_observation(state: &WorldState, agent: usize) -> Result<Observation, EngineError> {
    let me = state.entity(agent)?;
    if !me.active {
        return Err(EngineError::InactiveAgent(agent));
    }
    let origin = me.position;
    let (fx, fy) = me.orientation.forward();
    let (rx, ry) = me.orientation.right();
    let mut obs = Observation::blank(agent);

    let map = state.map();
    for row in 0..OBS_ROWS {
        let ahead = (OBS_AHEAD - row) as i32;
        for col in 0..OBS_COLS {
            let side = col as i32 - OBS_SIDE as i32;
            let p = Position::new(
                origin.x + fx * ahead + rx * side,
                origin.y + fy * ahead + ry * side,
            );
            if map.terrain(p) == Some(Terrain::Wall) {
                obs.set_pixel(row, col, Pixel::Wall);
            }
        }
    }

    // world cell -> window cell
    let window = |p: Position| -> Option<(usize, usize)> {
        let dx = p.x - origin.x;
        let dy = p.y - origin.y;
        let ahead = dx * fx + dy * fy;
        let side = dx * rx + dy * ry;
        let row = OBS_AHEAD as i32 - ahead;
        let col = OBS_SIDE as i32 + side;
        if (0..OBS_ROWS as i32).contains(&row) && (0..OBS_COLS as i32).contains(&col) {
            Some((row as usize, col as usize))
        } else {
            None
        }
    };

    for (site, &p) in state.apple_sites().iter().enumerate() {
        if state.apple_present(site) {
            if let Some((r, c)) = window(p) {
                obs.set_pixel(r, c, Pixel::Apple);
            }
        }
    }
    for shot in state.beams() {
        for &p in &shot.cells {
            if let Some((r, c)) = window(p) {
                obs.set_pixel(r, c, Pixel::Beam);
            }
        }
    }
    for e in state.entities.iter().filter(|e| e.active) {
        let colour = if e.id == agent {
            Pixel::SelfAgent
        } else {
            match (e.kind, state.relation) {
                (EntityKind::Prey, _) => Pixel::Prey,
                (EntityKind::Player, Relation::Teammates) => Pixel::Teammate,
                (EntityKind::Player, Relation::Opponents) => Pixel::Opponent,
            }
        };
        if let Some((r, c)) = window(e.position) {
            obs.set_pixel(r, c, colour);
        }
    }
    Ok(obs)
}
