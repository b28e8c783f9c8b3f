//! The model-free learner: input-driven recurrent reservoir, ring-attractor
//! actor, critic, continuous TD error, and the TD-modulated plasticity
//! rules that train the actor and critic readouts.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fast_tanh, leaky_step, relu, threshold_linear, IntegratorParams, RingKernel};
use crate::linalg::{Mat, SparseMat};

/// Reservoir recurrent gain.
pub const LAMBDA: f64 = 1.5;
/// Reservoir noise amplitude.
pub const SIGMA_RES: f64 = 0.025;
/// Reservoir connection probability.
pub const CONNECTION_P: f64 = 0.1;
/// Actor ring size.
pub const N_ACTOR: usize = 40;
/// Actor noise amplitude.
pub const SIGMA_ACTOR: f64 = 0.25;
/// Gain on the actor's exploration noise. The source equations leave the
/// rate-to-displacement scale chain open; this constant sets the ring's
/// operating scale so realized speeds land near the reported ~0.8 m/s. The
/// learned reservoir-to-actor pathway is not scaled: its weights grow in
/// proportion to the ring rates through the three-factor rule, so it
/// reaches the same operating scale on its own.
pub const ACTOR_NOISE_GAIN: f64 = 20.0;
/// Gain on the navigator drive into the actor. The navigator emits a
/// probability vector whose direction-coding part is its deviation from
/// the uniform 1/M floor (at most a few percent per unit); that deviation
/// is what the ring integrates, amplified here to the same operating scale
/// as the noise. Suppressed (all-zero) and uniform (zero-distance)
/// navigator outputs contribute exactly nothing either way.
pub const NAV_DRIVE_GAIN: f64 = 400.0;
/// Firing-rate ceiling of the actor units. The near-critical ring plus the
/// rate-proportional three-factor rule is unstable under an unbounded
/// rectifier (rates run away during reward consumption); a ceiling bounds
/// the loop and caps the population-vector speed at about 0.9 m/s.
pub const RHO_MAX: f64 = 5.0;
/// Critic noise amplitude.
pub const SIGMA_CRITIC: f64 = 1e-8;
/// Action gain.
pub const A0: f64 = 0.03;

/// Recurrent reservoir with threshold-linear rates.
///
/// Input weights are uniform on [-1, 1]; recurrent weights are Gaussian with
/// variance 1/(pN) at connection probability p = 0.1 and are stored sparse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reservoir {
    pub n: usize,
    /// Input weights stored input-major (n_inputs x n) so the forward pass
    /// walks one contiguous row per active input.
    pub w_inp: Mat,
    pub w_rec: SparseMat,
    pub params: IntegratorParams,
    pub x: Vec<f64>,
    pub rates: Vec<f64>,
    tanh_buf: Vec<f64>,
    drive_buf: Vec<f64>,
    input_drive_buf: Vec<f64>,
}

impl Reservoir {
    pub fn new(n: usize, n_inputs: usize, structure_rng: &mut ChaCha12Rng) -> Self {
        Self::with_noise(n, n_inputs, SIGMA_RES, structure_rng)
    }

    pub fn with_noise(
        n: usize,
        n_inputs: usize,
        sigma: f64,
        structure_rng: &mut ChaCha12Rng,
    ) -> Self {
        let w_inp = Mat::from_fn(n_inputs, n, |_, _| structure_rng.gen_range(-1.0..1.0));
        let std = (1.0 / (CONNECTION_P * n as f64)).sqrt();
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = Vec::new();
            for k in 0..n {
                if structure_rng.gen::<f64>() < CONNECTION_P {
                    let w: f64 = structure_rng.sample::<f64, _>(StandardNormal) * std;
                    row.push((k, w));
                }
            }
            rows.push(row);
        }
        let w_rec = SparseMat::from_rows(n, n, rows);
        Self {
            n,
            w_inp,
            w_rec,
            params: IntegratorParams::standard(sigma),
            x: vec![0.0; n],
            rates: vec![0.0; n],
            tanh_buf: vec![0.0; n],
            drive_buf: vec![0.0; n],
            input_drive_buf: vec![0.0; n],
        }
    }

    /// Fraction of nonzero recurrent weights.
    pub fn sparsity(&self) -> f64 {
        self.w_rec.nnz() as f64 / (self.n * self.n) as f64
    }

    /// Draw every potential from a Gaussian with the given standard
    /// deviation (trial-start reset).
    pub fn reset(&mut self, std: f64, rng: &mut ChaCha12Rng) {
        for x in self.x.iter_mut() {
            *x = rng.sample::<f64, _>(StandardNormal) * std;
        }
        for (r, &x) in self.rates.iter_mut().zip(self.x.iter()) {
            *r = threshold_linear(x);
        }
    }

    /// One 20 ms step: leaky integration of weighted input, tanh-saturated
    /// recurrence scaled by lambda, and white noise. Returns the new rates.
    pub fn step(&mut self, input: &[f64], noise_rng: &mut ChaCha12Rng) -> &[f64] {
        assert_eq!(
            input.len(),
            self.w_inp.rows,
            "reservoir input length {} != configured {}",
            input.len(),
            self.w_inp.rows
        );
        for (t, &x) in self.tanh_buf.iter_mut().zip(self.x.iter()) {
            *t = fast_tanh(x);
        }
        self.w_rec.forward(&self.tanh_buf, &mut self.drive_buf);
        self.input_drive_buf.fill(0.0);
        for (i, &u) in input.iter().enumerate() {
            if u != 0.0 {
                let row = self.w_inp.row(i);
                for (d, w) in self.input_drive_buf.iter_mut().zip(row.iter()) {
                    *d += w * u;
                }
            }
        }
        let noise_on = self.params.sigma > 0.0;
        for j in 0..self.n {
            let drive = LAMBDA * self.drive_buf[j] + self.input_drive_buf[j];
            let noise: f64 = if noise_on { noise_rng.sample(StandardNormal) } else { 0.0 };
            self.x[j] = leaky_step(self.x[j], drive, &self.params, noise);
            self.rates[j] = threshold_linear(self.x[j]);
        }
        &self.rates
    }
}

/// Ring of 40 actor neurons; the lateral kernel smooths the heading and the
/// readout is the population vector scaled by a0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActorRing {
    pub m: usize,
    /// Plastic reservoir-to-actor weights (post x pre), zero at birth.
    pub w_actor: Mat,
    lateral: LateralKernel,
    pub params: IntegratorParams,
    pub q: Vec<f64>,
    pub rho: Vec<f64>,
    lat_buf: Vec<f64>,
    directions: Vec<[f64; 2]>,
}

/// RingKernel is rebuilt from its parameters on deserialize.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "LateralParams", into = "LateralParams")]
struct LateralKernel(RingKernel);

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct LateralParams {
    size: usize,
    w_plus: f64,
    w_minus: f64,
    phi: f64,
}

impl From<LateralParams> for LateralKernel {
    fn from(p: LateralParams) -> Self {
        LateralKernel(RingKernel::new(p.size, p.w_plus, p.w_minus, p.phi))
    }
}

impl From<LateralKernel> for LateralParams {
    fn from(k: LateralKernel) -> Self {
        LateralParams { size: k.0.size, w_plus: k.0.w_plus, w_minus: k.0.w_minus, phi: k.0.phi }
    }
}

impl ActorRing {
    pub fn new(n_reservoir: usize) -> Self {
        let m = N_ACTOR;
        let directions = (0..m)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                [theta.sin(), theta.cos()]
            })
            .collect();
        Self {
            m,
            w_actor: Mat::zeros(m, n_reservoir),
            lateral: LateralKernel(RingKernel::new(m, 1.0, -1.0, 20.0)),
            params: IntegratorParams::standard(SIGMA_ACTOR * ACTOR_NOISE_GAIN),
            q: vec![0.0; m],
            rho: vec![0.0; m],
            lat_buf: vec![0.0; m],
            directions,
        }
    }

    pub fn reset(&mut self) {
        self.q.fill(0.0);
        self.rho.fill(0.0);
    }

    /// One actor step. `beta` mixes the navigator drive against the
    /// reservoir readout; the lateral term always uses the previous step's
    /// rates.
    pub fn step(
        &mut self,
        reservoir_rates: &[f64],
        reservoir_active: &[usize],
        q_nav: &[f64],
        beta: f64,
        noise_rng: &mut ChaCha12Rng,
    ) -> &[f64] {
        debug_assert!((0.0..=1.0).contains(&beta));
        self.lateral.0.drive(&self.rho, &mut self.lat_buf);
        let nav_mean = if beta > 0.0 {
            q_nav.iter().sum::<f64>() / q_nav.len() as f64
        } else {
            0.0
        };
        for k in 0..self.m {
            let mut drive = self.lat_buf[k];
            if beta > 0.0 {
                drive += beta * NAV_DRIVE_GAIN * (q_nav[k] - nav_mean);
            }
            if beta < 1.0 {
                let row = self.w_actor.row(k);
                let mut acc = 0.0;
                for &j in reservoir_active {
                    acc += row[j] * reservoir_rates[j];
                }
                drive += (1.0 - beta) * acc;
            }
            let noise: f64 = noise_rng.sample(StandardNormal);
            self.q[k] = leaky_step(self.q[k], drive, &self.params, noise);
            self.rho[k] = relu(self.q[k]).min(RHO_MAX);
        }
        &self.rho
    }

    /// Population-vector action (Eq. of the ring readout): the vector sum of
    /// unit directions weighted by rates, scaled by a0/M.
    pub fn action(&self) -> [f64; 2] {
        action_from_rates(&self.rho, &self.directions)
    }
}

/// Vector-sum readout over ring directions.
pub fn action_from_rates(rho: &[f64], directions: &[[f64; 2]]) -> [f64; 2] {
    debug_assert_eq!(rho.len(), directions.len());
    let m = rho.len() as f64;
    let mut a = [0.0, 0.0];
    for (r, d) in rho.iter().zip(directions.iter()) {
        a[0] += r * d[0];
        a[1] += r * d[1];
    }
    [A0 / m * a[0], A0 / m * a[1]]
}

/// Single critic neuron reading out the reservoir.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Critic {
    pub w_critic: Vec<f64>,
    pub params: IntegratorParams,
    pub zeta: f64,
    pub v: f64,
}

impl Critic {
    pub fn new(n_reservoir: usize) -> Self {
        Self {
            w_critic: vec![0.0; n_reservoir],
            params: IntegratorParams::standard(SIGMA_CRITIC),
            zeta: 0.0,
            v: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.zeta = 0.0;
        self.v = 0.0;
    }

    pub fn step(
        &mut self,
        reservoir_rates: &[f64],
        reservoir_active: &[usize],
        noise_rng: &mut ChaCha12Rng,
    ) -> f64 {
        let mut drive = 0.0;
        for &j in reservoir_active {
            drive += self.w_critic[j] * reservoir_rates[j];
        }
        let noise: f64 = noise_rng.sample(StandardNormal);
        self.zeta = leaky_step(self.zeta, drive, &self.params, noise);
        self.v = relu(self.zeta);
        self.v
    }

    /// Value map probe: the value the critic would settle to for a given
    /// reservoir state (fixed point of the leak, no noise).
    pub fn value_at(&self, reservoir_rates: &[f64]) -> f64 {
        let drive: f64 =
            self.w_critic.iter().zip(reservoir_rates.iter()).map(|(w, r)| w * r).sum();
        relu(drive)
    }
}

/// TD-learning constants; alpha_g = dt / tau_g.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TdParams {
    pub tau_g_ms: f64,
    pub alpha_g: f64,
    pub eta_critic: f64,
    pub eta_actor: f64,
}

impl TdParams {
    pub fn new(tau_g_ms: f64, dt_ms: f64, eta_critic: f64, eta_actor: f64) -> Self {
        Self { tau_g_ms, alpha_g: dt_ms / tau_g_ms, eta_critic, eta_actor }
    }
}

/// Discretized continuous TD error:
/// `delta = R(t - dt) + v(t) - (1 + alpha_g) v(t - dt)`.
#[inline]
pub fn td_error(v_now: f64, v_prev: f64, reward_rate_prev: f64, alpha_g: f64) -> f64 {
    reward_rate_prev + v_now - (1.0 + alpha_g) * v_prev
}

/// Two-factor critic rule: `dW_j = eta * r_j * delta`.
pub fn update_critic(
    w_critic: &mut [f64],
    rates: &[f64],
    active: &[usize],
    delta: f64,
    eta: f64,
) {
    let scale = eta * delta;
    if scale == 0.0 {
        return;
    }
    for &j in active {
        w_critic[j] += scale * rates[j];
    }
}

/// Three-factor actor rule: `dW_jk = eta * r_j * rho_k * delta`.
pub fn update_actor(w_actor: &mut Mat, rates: &[f64], rho: &[f64], delta: f64, eta: f64) {
    w_actor.outer_acc(rho, rates, eta * delta);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, stream_rng};
    use approx::assert_relative_eq;

    #[test]
    fn reservoir_zero_everything_stays_zero() {
        let mut rng = stream_rng(1, stream::STRUCTURE);
        let mut res = Reservoir::with_noise(64, 67, 0.0, &mut rng);
        let mut noise = stream_rng(1, stream::RESERVOIR);
        let input = vec![0.0; 67];
        for _ in 0..10 {
            res.step(&input, &mut noise);
        }
        assert!(res.rates.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn reservoir_sparsity_near_p() {
        let mut rng = stream_rng(2, stream::STRUCTURE);
        let res = Reservoir::new(512, 67, &mut rng);
        assert!((res.sparsity() - CONNECTION_P).abs() < 0.02, "sparsity {}", res.sparsity());
    }

    #[test]
    fn reservoir_bounded_under_noise() {
        let mut rng = stream_rng(3, stream::STRUCTURE);
        let mut res = Reservoir::new(128, 67, &mut rng);
        let mut noise = stream_rng(3, stream::RESERVOIR);
        let input = vec![0.0; 67];
        for _ in 0..10_000 {
            res.step(&input, &mut noise);
        }
        assert!(res.x.iter().all(|x| x.abs() < 50.0), "potentials blew up");
    }

    #[test]
    fn reservoir_seeded_runs_identical() {
        let run = || {
            let mut rng = stream_rng(4, stream::STRUCTURE);
            let mut res = Reservoir::new(96, 67, &mut rng);
            let mut noise = stream_rng(4, stream::RESERVOIR);
            let mut input = vec![0.0; 67];
            input[3] = 0.7;
            input[52] = 3.0;
            for _ in 0..200 {
                res.step(&input, &mut noise);
            }
            res.x.clone()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn actor_beta_one_ignores_reservoir_weights() {
        let mut nav = vec![0.0; N_ACTOR];
        nav[5] = 0.9;
        let rates = vec![4.0; 32];
        let active: Vec<usize> = (0..32).collect();
        let mut a = ActorRing::new(32);
        let mut b = ActorRing::new(32);
        for k in 0..N_ACTOR {
            for j in 0..32 {
                b.w_actor.set(k, j, 123.0); // arbitrary, must not matter
            }
        }
        let mut rng_a = stream_rng(5, stream::ACTOR);
        let mut rng_b = stream_rng(5, stream::ACTOR);
        for _ in 0..50 {
            a.step(&rates, &active, &nav, 1.0, &mut rng_a);
            b.step(&rates, &active, &nav, 1.0, &mut rng_b);
        }
        assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn action_symmetry_and_one_hot() {
        let ring = ActorRing::new(8);
        let uniform = vec![1.0; N_ACTOR];
        let a = action_from_rates(&uniform, &ring.directions);
        assert!(a[0].abs() < 1e-12 && a[1].abs() < 1e-12);

        let mut one_hot = vec![0.0; N_ACTOR];
        one_hot[3] = 1.0;
        let a = action_from_rates(&one_hot, &ring.directions);
        let theta = 2.0 * std::f64::consts::PI * 3.0 / 40.0;
        assert_relative_eq!(a[0], A0 / 40.0 * theta.sin(), epsilon = 1e-12);
        assert_relative_eq!(a[1], A0 / 40.0 * theta.cos(), epsilon = 1e-12);
    }

    #[test]
    fn action_rotation_equivariance() {
        let ring = ActorRing::new(8);
        let rho: Vec<f64> = (0..N_ACTOR).map(|k| ((k * 31 % 11) as f64) * 0.37).collect();
        let mut rotated = rho.clone();
        rotated.rotate_right(1);
        let a = action_from_rates(&rho, &ring.directions);
        let b = action_from_rates(&rotated, &ring.directions);
        let dtheta = 2.0 * std::f64::consts::PI / 40.0;
        // Rotating rates by one index rotates the action vector by 2 pi / M.
        let expected = [
            a[0] * dtheta.cos() + a[1] * dtheta.sin(),
            -a[0] * dtheta.sin() + a[1] * dtheta.cos(),
        ];
        assert_relative_eq!(b[0], expected[0], epsilon = 1e-12);
        assert_relative_eq!(b[1], expected[1], epsilon = 1e-12);
    }

    #[test]
    fn action_norm_triangle_bound() {
        let ring = ActorRing::new(8);
        let rho: Vec<f64> = (0..N_ACTOR).map(|k| (k % 5) as f64).collect();
        let a = action_from_rates(&rho, &ring.directions);
        let norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let bound = A0 / 40.0 * rho.iter().sum::<f64>();
        assert!(norm <= bound + 1e-12);
    }

    #[test]
    fn td_error_by_hand() {
        let alpha_g = 20.0 / 3000.0;
        assert_relative_eq!(td_error(2.0, 2.0, 0.0, alpha_g), -alpha_g * 2.0, epsilon = 1e-12);
        assert_relative_eq!(td_error(0.0, 0.0, 5.0, alpha_g), 5.0, epsilon = 1e-12);
        assert_relative_eq!(alpha_g, 0.006667, epsilon = 1e-4);
    }

    #[test]
    fn critic_update_by_hand() {
        let mut w = vec![0.0; 4];
        update_critic(&mut w, &[0.0, 2.0, 0.0, 1.0], &[1, 3], 1.5, 0.0002);
        assert_relative_eq!(w[1], 6e-4, epsilon = 1e-15);
        assert_relative_eq!(w[3], 3e-4, epsilon = 1e-15);
        assert_eq!(w[0], 0.0);
        // No error, no change.
        update_critic(&mut w, &[5.0; 4], &[0, 1, 2, 3], 0.0, 0.0002);
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn actor_update_by_hand_and_rank_one() {
        let mut w = Mat::zeros(3, 2);
        let rates = [1.0, 0.5];
        let rho = [2.0, 0.0, 4.0];
        update_actor(&mut w, &rates, &rho, -1.0, 5e-5);
        assert_relative_eq!(w.get(0, 0), -1e-4, epsilon = 1e-18);
        assert_eq!(w.get(1, 0), 0.0); // rho zero row untouched
        // Rank <= 1: rows proportional.
        let ratio = w.get(2, 0) / w.get(0, 0);
        assert_relative_eq!(w.get(2, 1), ratio * w.get(0, 1), epsilon = 1e-12);
    }

    #[test]
    fn plastic_weights_zero_until_first_signal() {
        let mut w = Mat::zeros(2, 2);
        update_actor(&mut w, &[0.0, 0.0], &[1.0, 1.0], 3.0, 0.1);
        assert!(w.data.iter().all(|&x| x == 0.0));
        update_actor(&mut w, &[1.0, 1.0], &[0.0, 0.0], 3.0, 0.1);
        assert!(w.data.iter().all(|&x| x == 0.0));
    }
}
