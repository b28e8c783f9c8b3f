//! Shared numerical primitives: leaky-integrator stepping, activation
//! functions, ring lateral connectivity, and low-pass filters.
//!
//! Every neural module in the crate is built from these pieces. All
//! stochastic operations take an explicit noise sample so that any caller
//! holding a seeded generator is fully deterministic.

use serde::{Deserialize, Serialize};

/// Default simulation time step (ms).
pub const DT_MS: f64 = 20.0;
/// Default membrane time constant (ms).
pub const TAU_MEMBRANE_MS: f64 = 100.0;

/// Parameters of the Euler–Maruyama discretized leaky integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorParams {
    /// Membrane time constant (ms).
    pub tau_ms: f64,
    /// Step size (ms).
    pub dt_ms: f64,
    /// dt/tau, stored so the hot loop never divides.
    pub alpha: f64,
    /// Noise amplitude (unitless standard deviation of the white-noise drive).
    pub sigma: f64,
}

impl IntegratorParams {
    /// Build parameters from a time constant and step, both in ms.
    ///
    /// Panics if either is non-positive or sigma is negative; these are
    /// construction-time configuration errors, never runtime conditions.
    pub fn new(tau_ms: f64, dt_ms: f64, sigma: f64) -> Self {
        assert!(tau_ms > 0.0, "tau must be positive");
        assert!(dt_ms > 0.0, "dt must be positive");
        assert!(sigma >= 0.0, "sigma must be non-negative");
        Self { tau_ms, dt_ms, alpha: dt_ms / tau_ms, sigma }
    }

    /// Standard parameters: tau = 100 ms, dt = 20 ms.
    pub fn standard(sigma: f64) -> Self {
        Self::new(TAU_MEMBRANE_MS, DT_MS, sigma)
    }

    /// Scale applied to a standard-normal sample inside the drive term.
    #[inline]
    pub fn noise_scale(&self) -> f64 {
        if self.sigma == 0.0 { 0.0 } else { (self.sigma * self.sigma / self.alpha).sqrt() }
    }
}

/// One Euler–Maruyama step of the leaky integrator:
/// `x' = (1 - a) x + a (drive + sqrt(sigma^2 / a) * noise)`.
#[inline]
pub fn leaky_step(x_prev: f64, drive: f64, params: &IntegratorParams, noise_sample: f64) -> f64 {
    (1.0 - params.alpha) * x_prev
        + params.alpha * (drive + params.noise_scale() * noise_sample)
}

/// Reservoir activation: zero below 3, identity from 3 up.
#[inline]
pub fn threshold_linear(x: f64) -> f64 {
    if x < 3.0 { 0.0 } else { x }
}

/// Rectified linear unit.
#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 { x } else { 0.0 }
}

/// Bump-attractor activation: 0 for x < 0, x^2 for 0 < x < 0.5,
/// sqrt(2x - 0.5) for x >= 0.5. The jump at 0.5 is implemented as printed,
/// not smoothed.
#[inline]
pub fn bump_activation(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x < 0.5 {
        x * x
    } else {
        (2.0 * x - 0.5).sqrt()
    }
}

/// One low-pass filter step: `prev + (dt/tau) * (input - prev)`.
#[inline]
pub fn low_pass_step(prev: f64, input: f64, tau_ms: f64, dt_ms: f64) -> f64 {
    prev + (dt_ms / tau_ms) * (input - prev)
}

const TANH_TABLE_SIZE: usize = 8192;
const TANH_RANGE: f64 = 8.0;

struct TanhTable([f64; TANH_TABLE_SIZE + 1]);

static TANH_TABLE: std::sync::OnceLock<TanhTable> = std::sync::OnceLock::new();

fn tanh_table() -> &'static TanhTable {
    TANH_TABLE.get_or_init(|| {
        let mut t = [0.0; TANH_TABLE_SIZE + 1];
        for (i, v) in t.iter_mut().enumerate() {
            *v = (-TANH_RANGE + 2.0 * TANH_RANGE * i as f64 / TANH_TABLE_SIZE as f64).tanh();
        }
        TanhTable(t)
    })
}

/// Table-interpolated tanh (absolute error below 1e-6) for the reservoir
/// hot loop, saturating to +-1 outside [-8, 8].
#[inline]
pub fn fast_tanh(x: f64) -> f64 {
    if x >= TANH_RANGE {
        return 1.0;
    }
    if x <= -TANH_RANGE {
        return -1.0;
    }
    let table = &tanh_table().0;
    let pos = (x + TANH_RANGE) * (TANH_TABLE_SIZE as f64 / (2.0 * TANH_RANGE));
    let idx = pos as usize;
    let frac = pos - idx as f64;
    table[idx] + frac * (table[idx + 1] - table[idx])
}

/// Ring lateral connectivity: uniform inhibition plus normalized local
/// excitation, `W[k][h] = w_minus/M + w_plus * f(k,h) / sum_h f(k,h)` with
/// `f(k,h) = (1 - delta_kh) exp(phi cos(theta_k - theta_h))`.
#[derive(Debug, Clone)]
pub struct RingKernel {
    pub size: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub phi: f64,
    /// Row-major M x M weights; row k holds the weights from every unit h
    /// onto unit k.
    weights: Vec<f64>,
}

impl RingKernel {
    pub fn new(size: usize, w_plus: f64, w_minus: f64, phi: f64) -> Self {
        assert!(size >= 2, "ring needs at least two units");
        let m = size as f64;
        let mut weights = vec![0.0; size * size];
        for k in 0..size {
            let theta_k = 2.0 * std::f64::consts::PI * k as f64 / m;
            let mut f_row = vec![0.0; size];
            let mut f_sum = 0.0;
            for h in 0..size {
                if h == k {
                    continue;
                }
                let theta_h = 2.0 * std::f64::consts::PI * h as f64 / m;
                let f = (phi * (theta_k - theta_h).cos()).exp();
                f_row[h] = f;
                f_sum += f;
            }
            for h in 0..size {
                weights[k * size + h] = w_minus / m + w_plus * f_row[h] / f_sum;
            }
        }
        Self { size, w_plus, w_minus, phi, weights }
    }

    #[inline]
    pub fn weight(&self, k: usize, h: usize) -> f64 {
        self.weights[k * self.size + h]
    }

    /// Lateral drive onto every unit given the current rates.
    pub fn drive(&self, rates: &[f64], out: &mut [f64]) {
        debug_assert_eq!(rates.len(), self.size);
        debug_assert_eq!(out.len(), self.size);
        // Uniform inhibition term is shared by every row.
        let sum: f64 = rates.iter().sum();
        let inhib = self.w_minus / self.size as f64 * sum;
        for k in 0..self.size {
            let row = &self.weights[k * self.size..(k + 1) * self.size];
            let mut acc = 0.0;
            for (h, &r) in rates.iter().enumerate() {
                if r != 0.0 {
                    // Subtract the baked-in uniform part, added back once below.
                    acc += (row[h] - self.w_minus / self.size as f64) * r;
                }
            }
            out[k] = acc + inhib;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn leaky_step_zero_fixed_point() {
        let p = IntegratorParams::standard(0.0);
        assert_eq!(leaky_step(0.0, 0.0, &p, 0.0), 0.0);
    }

    #[test]
    fn leaky_step_decay_by_hand() {
        // alpha = 0.2 (dt = 20 ms, tau = 100 ms), x = 1, no drive, no noise.
        let p = IntegratorParams::new(100.0, 20.0, 0.0);
        assert_relative_eq!(leaky_step(1.0, 0.0, &p, 0.0), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn leaky_step_converges_to_constant_drive() {
        let p = IntegratorParams::standard(0.0);
        let c = 2.75;
        let mut x = 0.0;
        for _ in 0..1000 {
            x = leaky_step(x, c, &p, 0.0);
        }
        assert!((x - c).abs() < 1e-6, "x = {x}, expected {c}");
    }

    #[test]
    fn leaky_step_is_contraction_toward_drive() {
        let p = IntegratorParams::standard(0.0);
        let c = -1.3;
        for &x in &[5.0, -2.0, 0.0, 100.0] {
            let x1 = leaky_step(x, c, &p, 0.0);
            assert_relative_eq!((x1 - c).abs(), (1.0 - p.alpha) * (x - c).abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn threshold_linear_branches() {
        assert_eq!(threshold_linear(2.999), 0.0);
        assert_eq!(threshold_linear(3.0), 3.0);
        assert_eq!(threshold_linear(-5.0), 0.0);
        assert_eq!(threshold_linear(4.5), 4.5);
    }

    #[test]
    fn bump_activation_branches() {
        assert_eq!(bump_activation(-1.0), 0.0);
        assert_relative_eq!(bump_activation(0.25), 0.0625, epsilon = 1e-15);
        // sqrt(2 * 0.5 - 0.5) = sqrt(0.5); the function jumps at 0.5 as printed.
        assert_relative_eq!(bump_activation(0.5), 0.7071, epsilon = 1e-4);
    }

    #[test]
    fn bump_activation_monotone_within_branches() {
        let mut prev = bump_activation(0.0);
        for i in 1..50 {
            let x = i as f64 * 0.01;
            let y = bump_activation(x);
            assert!(y >= prev);
            prev = y;
        }
        let mut prev = bump_activation(0.5);
        for i in 1..100 {
            let y = bump_activation(0.5 + i as f64 * 0.05);
            assert!(y >= prev);
            prev = y;
        }
    }

    #[test]
    fn ring_kernel_self_term() {
        let ring = RingKernel::new(40, 1.0, -1.0, 20.0);
        for k in [0, 7, 39] {
            assert_relative_eq!(ring.weight(k, k), -0.025, epsilon = 1e-12);
        }
    }

    #[test]
    fn ring_kernel_row_sums() {
        for m in [5usize, 40, 54] {
            let ring = RingKernel::new(m, 1.0, -1.0, 20.0);
            for k in 0..m {
                let sum: f64 = (0..m).map(|h| ring.weight(k, h)).sum();
                assert!(
                    (sum - (ring.w_plus + ring.w_minus)).abs() < 1e-9,
                    "row {k} of M={m} sums to {sum}"
                );
            }
        }
    }

    #[test]
    fn ring_kernel_nearest_neighbor_dominates() {
        let ring = RingKernel::new(40, 1.0, -1.0, 20.0);
        assert!(ring.weight(5, 6) > ring.weight(5, 7));
        assert!(ring.weight(5, 4) > ring.weight(5, 3));
    }

    #[test]
    fn ring_drive_matches_naive_product() {
        let ring = RingKernel::new(54, 2.0, -10.0, 300.0);
        let rates: Vec<f64> = (0..54).map(|i| ((i * 13 % 7) as f64) * 0.3).collect();
        let mut fast = vec![0.0; 54];
        ring.drive(&rates, &mut fast);
        for k in 0..54 {
            let naive: f64 = (0..54).map(|h| ring.weight(k, h) * rates[h]).sum();
            assert_relative_eq!(fast[k], naive, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn fast_tanh_tracks_libm() {
        for i in -2000..=2000 {
            let x = i as f64 * 0.006;
            assert!((fast_tanh(x) - x.tanh()).abs() < 1e-6, "x = {x}");
        }
        assert_eq!(fast_tanh(9.0), 1.0);
        assert_eq!(fast_tanh(-123.0), -1.0);
        assert_eq!(fast_tanh(0.0), 0.0);
    }

    #[test]
    fn low_pass_fixed_point_and_single_step() {
        assert_eq!(low_pass_step(3.0, 3.0, 100.0, 20.0), 3.0);
        assert_relative_eq!(low_pass_step(0.0, 1.0, 100.0, 20.0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn low_pass_approaches_step_input() {
        // Held for 10 tau the filter should sit within 1e-4 of the input.
        let (tau, dt) = (1000.0, 20.0);
        let mut y = 0.0;
        let steps = (10.0 * tau / dt) as usize;
        for _ in 0..steps {
            y = low_pass_step(y, 1.0, tau, dt);
        }
        assert!((y - 1.0).abs() < 1e-4, "y = {y}");
    }
}
