//! Place-cell-driven X/Y coordinate cells trained by a path-integration
//! temporal-difference error with an eligibility trace over place-cell
//! activity.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{leaky_step, low_pass_step, IntegratorParams, DT_MS};
use crate::linalg::Mat;

/// Eligibility-trace time constant (ms).
pub const TAU_COORD_MS: f64 = 300.0;
/// Coordinate-cell learning rate.
pub const ETA_COORD: f64 = 0.01;
/// Coordinate-cell noise variance.
pub const SIGMA_COORD_SQ: f64 = 1e-8;

/// Coordinate cells plus their plastic place-cell weights and trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordinateMap {
    /// 2 x 49 plastic weights (row 0 = X cell, row 1 = Y cell).
    pub w_coord: Mat,
    /// Current coordinate estimate (m); the cells are linear so the
    /// potential is the rate.
    pub p: [f64; 2],
    /// Eligibility trace of place-cell activity.
    pub trace: Vec<f64>,
    pub tau_coord_ms: f64,
    pub eta: f64,
    params: IntegratorParams,
}

impl CoordinateMap {
    pub fn new(n_place_cells: usize) -> Self {
        Self {
            w_coord: Mat::zeros(2, n_place_cells),
            p: [0.0, 0.0],
            trace: vec![0.0; n_place_cells],
            tau_coord_ms: TAU_COORD_MS,
            eta: ETA_COORD,
            params: IntegratorParams::standard(SIGMA_COORD_SQ.sqrt()),
        }
    }

    /// Trial start: the coordinate estimate is re-anchored at the origin.
    pub fn reset(&mut self) {
        self.p = [0.0, 0.0];
        self.trace.fill(0.0);
    }

    /// Leaky linear step of both coordinate cells.
    pub fn coord_step(&mut self, pc: &[f64], noise_rng: &mut ChaCha12Rng) -> [f64; 2] {
        for axis in 0..2 {
            let row = self.w_coord.row(axis);
            let mut drive = 0.0;
            for (w, &u) in row.iter().zip(pc.iter()) {
                drive += w * u;
            }
            let noise: f64 = noise_rng.sample(StandardNormal);
            self.p[axis] = leaky_step(self.p[axis], drive, &self.params, noise);
        }
        self.p
    }

    /// Advance the eligibility trace with the current place-cell activity.
    pub fn trace_step(&mut self, pc: &[f64]) {
        for (e, &u) in self.trace.iter_mut().zip(pc.iter()) {
            *e = low_pass_step(*e, u, self.tau_coord_ms, DT_MS);
        }
    }

    /// Two-factor update: `dW[axis][i] = eta * trace_i * delta_axis`.
    pub fn update(&mut self, delta: [f64; 2]) {
        for axis in 0..2 {
            let scale = self.eta * delta[axis];
            if scale == 0.0 {
                continue;
            }
            let row = self.w_coord.row_mut(axis);
            for (w, &e) in row.iter_mut().zip(self.trace.iter()) {
                *w += scale * e;
            }
        }
    }
}

/// Path-integration TD error, per axis:
/// `delta_j = p_j(t) - p_j(t - dt) - a_hat_j(t)`.
#[inline]
pub fn pi_td_error(p_now: [f64; 2], p_prev: [f64; 2], a_hat: [f64; 2]) -> [f64; 2] {
    [p_now[0] - p_prev[0] - a_hat[0], p_now[1] - p_prev[1] - a_hat[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, stream_rng};
    use approx::assert_relative_eq;

    fn pc_pattern() -> Vec<f64> {
        (0..49).map(|i| ((i % 7) as f64) * 0.1).collect()
    }

    #[test]
    fn zero_weights_decay_to_origin() {
        let mut map = CoordinateMap::new(49);
        map.p = [0.5, -0.25];
        let mut rng = stream_rng(1, stream::COORD);
        let pc = pc_pattern();
        for _ in 0..500 {
            map.coord_step(&pc, &mut rng);
        }
        assert!(map.p[0].abs() < 1e-2 && map.p[1].abs() < 1e-2);
    }

    #[test]
    fn constant_input_reaches_weighted_fixed_point() {
        let mut map = CoordinateMap::new(49);
        map.params = IntegratorParams::standard(0.0);
        for i in 0..49 {
            map.w_coord.set(0, i, 0.01 * i as f64);
            map.w_coord.set(1, i, -0.02);
        }
        let pc = pc_pattern();
        let mut rng = stream_rng(2, stream::COORD);
        for _ in 0..1000 {
            map.coord_step(&pc, &mut rng);
        }
        let expect_x: f64 = (0..49).map(|i| 0.01 * i as f64 * pc[i]).sum();
        let expect_y: f64 = (0..49).map(|i| -0.02 * pc[i]).sum();
        assert_relative_eq!(map.p[0], expect_x, epsilon = 1e-6);
        assert_relative_eq!(map.p[1], expect_y, epsilon = 1e-6);
    }

    #[test]
    fn coord_step_seeded_determinism() {
        let run = || {
            let mut map = CoordinateMap::new(49);
            let mut rng = stream_rng(9, stream::COORD);
            let pc = pc_pattern();
            for _ in 0..100 {
                map.coord_step(&pc, &mut rng);
            }
            map.p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pi_error_arithmetic() {
        assert_eq!(pi_td_error([0.1, 0.0], [0.08, 0.0], [0.01, 0.0]), [
            0.010000000000000004,
            0.0
        ]);
        // Perfect integration yields zero error.
        let d = pi_td_error([0.25, -0.1], [0.2, -0.1], [0.05, 0.0]);
        assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15);
        // A stationary agent with drifting estimate sees the drift.
        let d = pi_td_error([0.3, 0.1], [0.2, 0.1], [0.0, 0.0]);
        assert_relative_eq!(d[0], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn trace_follows_low_pass() {
        let mut map = CoordinateMap::new(49);
        let pc = pc_pattern();
        // Constant input converges to the input.
        for _ in 0..((10.0 * TAU_COORD_MS / DT_MS) as usize) {
            map.trace_step(&pc);
        }
        for (e, &u) in map.trace.iter().zip(pc.iter()) {
            assert!((e - u).abs() < 1e-4);
        }
        // Silence decays back to zero.
        let zeros = vec![0.0; 49];
        for _ in 0..((10.0 * TAU_COORD_MS / DT_MS) as usize) {
            map.trace_step(&zeros);
        }
        assert!(map.trace.iter().all(|e| e.abs() < 1e-4));
    }

    #[test]
    fn update_arithmetic_and_gating() {
        let mut map = CoordinateMap::new(49);
        map.trace[7] = 0.5;
        map.update([0.02, 0.0]);
        assert_relative_eq!(map.w_coord.get(0, 7), 1e-4, epsilon = 1e-18);
        assert_eq!(map.w_coord.get(1, 7), 0.0);
        // Zero error or zero trace leaves weights alone.
        let before = map.w_coord.clone();
        map.update([0.0, 0.0]);
        assert_eq!(map.w_coord, before);
    }
}
