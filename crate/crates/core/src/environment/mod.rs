//! Arena geometry, place-cell encoding, cue presentation, motion with
//! boundary and obstacle handling, and reward kinetics.

pub mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Arena half width (m); walls sit at +-0.8.
pub const ARENA_HALF_WIDTH: f64 = 0.8;
/// Radius of a reward site (m).
pub const REWARD_RADIUS: f64 = 0.03;
/// Radius used by the visit-ratio metric (m).
pub const GOAL_ZONE_RADIUS: f64 = 0.1;
/// Distance the agent is pushed off a violated wall or obstacle face (m).
pub const BOUNCE_INWARD: f64 = 0.01;
/// Number of place cells / possible reward sites.
pub const N_PLACE_CELLS: usize = 49;
/// Number of distinct sensory cues.
pub const N_CUES: usize = 18;
/// Gain of the one-hot cue encoding.
pub const CUE_GAIN: f64 = 3.0;
/// Place-field width and grid pitch (m): seven centers spanning the arena.
pub const SIGMA_PC: f64 = 1.6 / 6.0;

/// Axis-aligned rectangular obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        Self { cx, cy, width, height }
    }

    #[inline]
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.cx).abs() < self.width / 2.0 && (p[1] - self.cy).abs() < self.height / 2.0
    }

    /// Distance from a point to the circle of radius `r` about `center`
    /// intersecting this rectangle.
    pub fn intersects_circle(&self, center: [f64; 2], r: f64) -> bool {
        let dx = (center[0] - self.cx).abs() - self.width / 2.0;
        let dy = (center[1] - self.cy).abs() - self.height / 2.0;
        let gx = dx.max(0.0);
        let gy = dy.max(0.0);
        gx * gx + gy * gy < r * r
    }
}

/// Arena geometry: square boundary, obstacles, and the 7x7 grid of
/// possible reward sites spaced 0.2 m from each other and the walls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Arena {
    pub half_width: f64,
    pub obstacles: Vec<Rect>,
    pub reward_sites: Vec<[f64; 2]>,
}

impl Arena {
    fn with_obstacles(obstacles: Vec<Rect>) -> Self {
        let mut reward_sites = Vec::with_capacity(N_PLACE_CELLS);
        for iy in 0..7 {
            for ix in 0..7 {
                reward_sites.push([0.2 * (ix as f64 - 3.0), 0.2 * (iy as f64 - 3.0)]);
            }
        }
        Self { half_width: ARENA_HALF_WIDTH, obstacles, reward_sites }
    }

    /// Open square arena.
    pub fn open() -> Self {
        Self::with_obstacles(Vec::new())
    }

    /// Inverted-U obstacle wrapping the central goal, opening to the south:
    /// two 0.08 x 0.6 verticals joined by a 0.08-wide connector across the top.
    pub fn single_goal_obstacle() -> Self {
        Self::with_obstacles(vec![
            Rect::new(-0.3, 0.0, 0.08, 0.6),
            Rect::new(0.3, 0.0, 0.08, 0.6),
            Rect::new(0.0, 0.3, 0.68, 0.08),
        ])
    }

    /// Rotated-H layout: one 0.08 x 0.8 central vertical plus two
    /// 0.68 x 0.08 horizontals at y = +-0.3.
    pub fn mpa_obstacle() -> Self {
        Self::with_obstacles(vec![
            Rect::new(0.0, 0.0, 0.08, 0.8),
            Rect::new(0.0, 0.3, 0.68, 0.08),
            Rect::new(0.0, -0.3, 0.68, 0.08),
        ])
    }

    #[inline]
    pub fn in_bounds(&self, p: [f64; 2]) -> bool {
        p[0].abs() <= self.half_width && p[1].abs() <= self.half_width
    }

    #[inline]
    pub fn in_obstacle(&self, p: [f64; 2]) -> Option<usize> {
        self.obstacles.iter().position(|r| r.contains(p))
    }

    pub fn position_valid(&self, p: [f64; 2]) -> bool {
        self.in_bounds(p) && self.in_obstacle(p).is_none()
    }

    /// Reward-site indices whose goal circle is clear of every obstacle.
    pub fn valid_goal_sites(&self) -> Vec<usize> {
        (0..self.reward_sites.len())
            .filter(|&i| {
                !self
                    .obstacles
                    .iter()
                    .any(|r| r.intersects_circle(self.reward_sites[i], REWARD_RADIUS))
            })
            .collect()
    }
}

/// Boundary walls; also the start positions (0.01 m inside the midpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wall {
    North,
    East,
    South,
    West,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::North, Wall::East, Wall::South, Wall::West];

    pub fn start_position(self) -> [f64; 2] {
        let d = ARENA_HALF_WIDTH - BOUNCE_INWARD;
        match self {
            Wall::North => [0.0, d],
            Wall::East => [d, 0.0],
            Wall::South => [0.0, -d],
            Wall::West => [-d, 0.0],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Wall::North => "N",
            Wall::East => "E",
            Wall::South => "S",
            Wall::West => "W",
        }
    }
}

/// Gaussian place fields on a 7x7 grid; the optional permutation models
/// remapping in a new maze (cell i reads the field at centers[perm[i]]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaceCellField {
    pub centers: Vec<[f64; 2]>,
    pub sigma: f64,
    pub permutation: Option<Vec<usize>>,
}

impl PlaceCellField {
    pub fn standard() -> Self {
        let mut centers = Vec::with_capacity(N_PLACE_CELLS);
        for iy in 0..7 {
            for ix in 0..7 {
                centers.push([
                    -ARENA_HALF_WIDTH + SIGMA_PC * ix as f64,
                    -ARENA_HALF_WIDTH + SIGMA_PC * iy as f64,
                ]);
            }
        }
        Self { centers, sigma: SIGMA_PC, permutation: None }
    }

    /// Activity of every place cell at position `s`. Activities below 1e-7
    /// (cells more than ~5 sigma away) are truncated to exactly zero so the
    /// input stays sparse.
    pub fn activity(&self, s: [f64; 2], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.centers.len());
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        for i in 0..self.centers.len() {
            let c = match &self.permutation {
                Some(p) => self.centers[p[i]],
                None => self.centers[i],
            };
            let dx = s[0] - c[0];
            let dy = s[1] - c[1];
            let u = (-(dx * dx + dy * dy) * inv).exp();
            out[i] = if u < 1e-7 { 0.0 } else { u };
        }
    }

    /// Shuffled copy of this field: place-cell selectivity is remapped by a
    /// uniform random permutation of the 49 centers.
    pub fn shuffled(&self, rng: &mut impl rand::Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..self.centers.len()).collect();
        perm.shuffle(rng);
        Self { centers: self.centers.clone(), sigma: self.sigma, permutation: Some(perm) }
    }
}

/// One-hot cue vector of length 18 with gain 3; id 0 means no cue.
pub fn cue_vector(id: u8, out: &mut [f64]) {
    debug_assert_eq!(out.len(), N_CUES);
    out.fill(0.0);
    if id >= 1 && id as usize <= N_CUES {
        out[id as usize - 1] = CUE_GAIN;
    }
}

/// Concatenate place-cell and cue activity into the 67-long input vector.
pub fn compose_input(pc: &[f64], cue: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), pc.len() + cue.len());
    out[..pc.len()].copy_from_slice(pc);
    out[pc.len()..].copy_from_slice(cue);
}

/// Move the agent one step. Returns the new position and the realized
/// displacement (the self-motion signal used by path integration).
///
/// The candidate position is `s + dt * a`. If it exits the arena or enters
/// an obstacle, the agent instead moves 0.01 m from its last position,
/// perpendicular to and away from the violated wall or face.
pub fn step_position(s: [f64; 2], a: [f64; 2], dt: f64, arena: &Arena) -> ([f64; 2], [f64; 2]) {
    let cand = [s[0] + dt * a[0], s[1] + dt * a[1]];
    let mut next = cand;
    if !arena.in_bounds(cand) {
        // Push off the boundary wall with the deepest violation.
        let over_x = cand[0].abs() - arena.half_width;
        let over_y = cand[1].abs() - arena.half_width;
        next = if over_x >= over_y {
            [s[0] - BOUNCE_INWARD * cand[0].signum(), s[1]]
        } else {
            [s[0], s[1] - BOUNCE_INWARD * cand[1].signum()]
        };
    } else if let Some(idx) = arena.in_obstacle(cand) {
        let r = arena.obstacles[idx];
        // Push away from the face nearest to the last position.
        let gaps = [
            (r.cx - r.width / 2.0 - s[0]).abs(),  // west face
            (s[0] - r.cx - r.width / 2.0).abs(),  // east face
            (r.cy - r.height / 2.0 - s[1]).abs(), // south face
            (s[1] - r.cy - r.height / 2.0).abs(), // north face
        ];
        let face = (0..4).min_by(|&i, &j| gaps[i].total_cmp(&gaps[j])).unwrap();
        next = match face {
            0 => [s[0] - BOUNCE_INWARD, s[1]],
            1 => [s[0] + BOUNCE_INWARD, s[1]],
            2 => [s[0], s[1] - BOUNCE_INWARD],
            _ => [s[0], s[1] + BOUNCE_INWARD],
        };
    }
    if !arena.position_valid(next) {
        next = s;
    }
    (next, [next[0] - s[0], next[1] - s[1]])
}

/// Double-exponential reward kinetics. A trigger bumps both accumulators by
/// R; the disbursed rate is their normalized difference and the consumed
/// integral approaches R exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardState {
    pub r_rise: f64,
    pub r_decay: f64,
    pub tau_rise_s: f64,
    pub tau_decay_s: f64,
    /// Total reward triggered so far this trial.
    pub total: f64,
    /// Running integral of the disbursed rate.
    pub consumed: f64,
}

impl RewardState {
    pub fn new() -> Self {
        Self {
            r_rise: 0.0,
            r_decay: 0.0,
            tau_rise_s: 0.1,
            tau_decay_s: 0.25,
            total: 0.0,
            consumed: 0.0,
        }
    }

    /// Instantaneous reward rate.
    #[inline]
    pub fn rate(&self) -> f64 {
        (self.r_decay - self.r_rise) / (self.tau_decay_s - self.tau_rise_s)
    }

    /// Trigger disbursement of an additional reward R.
    pub fn trigger(&mut self, r: f64) {
        self.r_rise += r;
        self.r_decay += r;
        self.total += r;
    }

    /// Advance by dt seconds and return the rate at the new time.
    ///
    /// Consumption integrates the rate exactly over the step (the exponential
    /// decays have closed-form integrals), which is what makes
    /// `consumed -> total` hold and the termination criterion reachable.
    pub fn step(&mut self, dt: f64) -> f64 {
        let fr = (-dt / self.tau_rise_s).exp();
        let fd = (-dt / self.tau_decay_s).exp();
        let rise_next = self.r_rise * fr;
        let decay_next = self.r_decay * fd;
        let drained_decay = self.tau_decay_s * (self.r_decay - decay_next);
        let drained_rise = self.tau_rise_s * (self.r_rise - rise_next);
        self.consumed += (drained_decay - drained_rise) / (self.tau_decay_s - self.tau_rise_s);
        self.r_rise = rise_next;
        self.r_decay = decay_next;
        self.rate()
    }

    pub fn is_consumed(&self) -> bool {
        self.total > 0.0 && self.consumed >= self.total - 1e-8
    }
}

impl Default for RewardState {
    fn default() -> Self {
        Self::new()
    }
}

/// Trial stop rule: probes run the full 60 s; rewarded trials end once the
/// reward is consumed to within 1e-8 or the clock reaches T_max.
pub fn trial_terminated(reward: &RewardState, t: f64, t_max: f64, probe: bool) -> bool {
    if probe {
        return t >= t_max;
    }
    reward.is_consumed() || t >= t_max
}

/// Parse an arena description from TOML, e.g.
/// `half_width = 0.8` plus an `[[obstacles]]` array of center/size entries.
pub fn arena_from_toml(text: &str) -> Result<Arena, ConfigError> {
    #[derive(Deserialize)]
    struct ArenaToml {
        #[serde(default)]
        obstacles: Vec<Rect>,
    }
    let parsed: ArenaToml =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let arena = Arena::with_obstacles(parsed.obstacles);
    for (i, r) in arena.obstacles.iter().enumerate() {
        if r.width <= 0.0 || r.height <= 0.0 {
            return Err(ConfigError::Invalid(format!("obstacle {i} has non-positive size")));
        }
    }
    Ok(arena)
}
