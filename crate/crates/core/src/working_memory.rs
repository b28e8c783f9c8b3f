//! Bump-attractor working memory holding a transient cue, plus the
//! two-action gate (update/maintain) that controls cue inflow and is
//! trained by TD-modulated Hebbian plasticity.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{bump_activation, leaky_step, relu, IntegratorParams, RingKernel};
use crate::linalg::Mat;

/// Bump ring size: three adjacent units per cue.
pub const N_BUMP: usize = 54;
/// Bump noise amplitude.
pub const SIGMA_BUMP: f64 = 0.1;
/// Gate softmax inverse temperature.
pub const BETA_GATE: f64 = 2.0;
/// Gate learning rate.
pub const ETA_GATE: f64 = 1e-4;
/// Gate noise amplitude (unstated in the source model; small and nonzero
/// so the untrained policy explores).
pub const SIGMA_GATE: f64 = 0.05;

/// Ring attractor of 54 units; each cue loads one unit and the lateral
/// kernel recruits its two neighbours into a persistent subpopulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpAttractor {
    pub x: Vec<f64>,
    /// Output rates (rectified potentials) passed to the reservoir.
    pub rates: Vec<f64>,
    #[serde(skip, default = "bump_kernel")]
    lateral: RingKernel,
    params: IntegratorParams,
    omega_buf: Vec<f64>,
    lat_buf: Vec<f64>,
}

fn bump_kernel() -> RingKernel {
    RingKernel::new(N_BUMP, 2.0, -10.0, 300.0)
}

impl BumpAttractor {
    pub fn new() -> Self {
        Self {
            x: vec![0.0; N_BUMP],
            rates: vec![0.0; N_BUMP],
            lateral: bump_kernel(),
            params: IntegratorParams::standard(SIGMA_BUMP),
            omega_buf: vec![0.0; N_BUMP],
            lat_buf: vec![0.0; N_BUMP],
        }
    }

    /// Cue loading: cue i (1-based) drives ring unit 3(i-1)+1 with weight 1.
    #[inline]
    pub fn loading_unit(cue_index: usize) -> usize {
        3 * cue_index + 1
    }

    pub fn reset(&mut self, std: f64, rng: &mut ChaCha12Rng) {
        for x in self.x.iter_mut() {
            *x = rng.sample::<f64, _>(StandardNormal) * std;
        }
        for (r, &x) in self.rates.iter_mut().zip(self.x.iter()) {
            *r = relu(x);
        }
    }

    /// One bump step. The gate bit multiplies the cue inflow; the recurrent
    /// drive passes potentials through the piecewise bump nonlinearity.
    pub fn step(&mut self, cue: &[f64], chi: bool, rng: &mut ChaCha12Rng) -> &[f64] {
        for (o, &x) in self.omega_buf.iter_mut().zip(self.x.iter()) {
            *o = bump_activation(x);
        }
        self.lateral.drive(&self.omega_buf, &mut self.lat_buf);
        for j in 0..N_BUMP {
            let mut drive = self.lat_buf[j];
            if chi {
                // One-to-one loading: unit 3i+1 receives cue i.
                if j % 3 == 1 {
                    drive += cue[j / 3];
                }
            }
            let noise: f64 = rng.sample(StandardNormal);
            self.x[j] = leaky_step(self.x[j], drive, &self.params, noise);
            self.rates[j] = relu(self.x[j]);
        }
        &self.rates
    }

    /// Index of the most active cue subpopulation (by summed rates), or
    /// None when the ring is quiet.
    pub fn active_subpopulation(&self) -> Option<usize> {
        let mut best = (0usize, 0.0f64);
        for cue in 0..N_BUMP / 3 {
            let sum: f64 = self.rates[3 * cue..3 * cue + 3].iter().sum();
            if sum > best.1 {
                best = (cue, sum);
            }
        }
        if best.1 > 0.5 { Some(best.0) } else { None }
    }
}

impl Default for BumpAttractor {
    fn default() -> Self {
        Self::new()
    }
}

/// The two gating neurons and their plastic reservoir weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkingMemoryGate {
    /// 2 x N plastic weights (row 0 = maintain, row 1 = update).
    pub w_gate: Mat,
    pub potentials: [f64; 2],
    pub beta: f64,
    pub eta: f64,
    params: IntegratorParams,
}

/// One sampled gating decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    /// One-hot chosen action: [maintain, update].
    pub pi: [f64; 2],
    /// Gate open (update) this step.
    pub chi: bool,
    /// Softmax probability of the update action.
    pub p_update: f64,
}

impl WorkingMemoryGate {
    pub fn new(n_reservoir: usize) -> Self {
        Self {
            w_gate: Mat::zeros(2, n_reservoir),
            potentials: [0.0; 2],
            beta: BETA_GATE,
            eta: ETA_GATE,
            params: IntegratorParams::standard(SIGMA_GATE),
        }
    }

    pub fn reset(&mut self) {
        self.potentials = [0.0; 2];
    }

    /// Leaky update of both gating neurons from the reservoir rates.
    pub fn step(
        &mut self,
        reservoir_rates: &[f64],
        reservoir_active: &[usize],
        rng: &mut ChaCha12Rng,
    ) -> [f64; 2] {
        for i in 0..2 {
            let row = self.w_gate.row(i);
            let mut drive = 0.0;
            for &j in reservoir_active {
                drive += row[j] * reservoir_rates[j];
            }
            let noise: f64 = rng.sample(StandardNormal);
            self.potentials[i] = leaky_step(self.potentials[i], drive, &self.params, noise);
        }
        self.potentials
    }

    /// Sample a gating action from the softmax over potentials. The gate
    /// opens exactly when the update action (unit 2) is chosen.
    pub fn policy(&self, rng: &mut ChaCha12Rng) -> GateDecision {
        let z0 = (self.beta * self.potentials[0]).exp();
        let z1 = (self.beta * self.potentials[1]).exp();
        let p_update = z1 / (z0 + z1);
        let pick_update = rng.gen::<f64>() < p_update;
        GateDecision {
            pi: if pick_update { [0.0, 1.0] } else { [1.0, 0.0] },
            chi: pick_update,
            p_update,
        }
    }

    /// Three-factor rule: only the chosen action's row moves,
    /// `dW = eta * r (x) pi * delta`.
    pub fn update(
        &mut self,
        reservoir_rates: &[f64],
        reservoir_active: &[usize],
        pi: [f64; 2],
        delta: f64,
    ) {
        let scale = self.eta * delta;
        if scale == 0.0 {
            return;
        }
        for i in 0..2 {
            if pi[i] == 0.0 {
                continue;
            }
            let row = self.w_gate.row_mut(i);
            for &j in reservoir_active {
                row[j] += scale * reservoir_rates[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, stream_rng};

    fn cue_vec(id: usize) -> Vec<f64> {
        let mut v = vec![0.0; 18];
        v[id] = 3.0;
        v
    }

    #[test]
    fn closed_gate_blocks_cue() {
        let mut rng_a = stream_rng(1, stream::BUMP);
        let mut rng_b = stream_rng(1, stream::BUMP);
        let mut with_cue = BumpAttractor::new();
        let mut without = BumpAttractor::new();
        let cue = cue_vec(3);
        let zero = vec![0.0; 18];
        for _ in 0..100 {
            with_cue.step(&cue, false, &mut rng_a);
            without.step(&zero, false, &mut rng_b);
        }
        assert_eq!(with_cue.x, without.x, "chi = 0 makes the cue invisible");
    }

    #[test]
    fn bump_persists_after_cue_removal() {
        let mut rng = stream_rng(2, stream::BUMP);
        let mut bump = BumpAttractor::new();
        let cue = cue_vec(3);
        let zero = vec![0.0; 18];
        // Present cue 4 (index 3) with the gate open for one second.
        for _ in 0..50 {
            bump.step(&cue, true, &mut rng);
        }
        assert_eq!(bump.active_subpopulation(), Some(3));
        // Gate closed, cue removed: the subpopulation persists for 10 s.
        for _ in 0..500 {
            bump.step(&zero, false, &mut rng);
        }
        assert_eq!(bump.active_subpopulation(), Some(3), "bump must persist");
    }

    #[test]
    fn open_gate_lets_distractor_relocate_bump() {
        let mut rng = stream_rng(3, stream::BUMP);
        let mut bump = BumpAttractor::new();
        for _ in 0..50 {
            bump.step(&cue_vec(3), true, &mut rng);
        }
        assert_eq!(bump.active_subpopulation(), Some(3));
        // A later distractor (cue 17, index 16) with the gate open wins.
        for _ in 0..50 {
            bump.step(&cue_vec(16), true, &mut rng);
        }
        assert_eq!(bump.active_subpopulation(), Some(16), "bump must relocate");
    }

    #[test]
    fn gate_zero_weights_small_potentials() {
        let mut gate = WorkingMemoryGate::new(16);
        let mut rng = stream_rng(4, stream::GATE);
        let rates = vec![2.0; 16];
        let active: Vec<usize> = (0..16).collect();
        for _ in 0..200 {
            gate.step(&rates, &active, &mut rng);
        }
        assert!(gate.potentials[0].abs() < 0.5);
        assert!(gate.potentials[1].abs() < 0.5);
    }

    #[test]
    fn gate_policy_probabilities() {
        let mut gate = WorkingMemoryGate::new(4);
        let mut rng = stream_rng(5, stream::GATE);
        gate.potentials = [0.0, 0.0];
        let d = gate.policy(&mut rng);
        assert!((d.p_update - 0.5).abs() < 1e-12);

        // Potential gap of 1 at beta = 2: P(update) = e^2 / (1 + e^2).
        gate.potentials = [0.0, 1.0];
        let d = gate.policy(&mut rng);
        let expect = (2.0f64).exp() / (1.0 + (2.0f64).exp());
        assert!((d.p_update - expect).abs() < 1e-12);
        assert!((expect - 0.881).abs() < 1e-3);
    }

    #[test]
    fn gate_policy_sampling_matches_probability() {
        let mut gate = WorkingMemoryGate::new(4);
        gate.potentials = [0.0, 0.5];
        let mut rng = stream_rng(6, stream::GATE);
        let n = 100_000;
        let mut updates = 0;
        let mut p = 0.0;
        for _ in 0..n {
            let d = gate.policy(&mut rng);
            if d.chi {
                updates += 1;
            }
            p = d.p_update;
        }
        let freq = updates as f64 / n as f64;
        assert!((freq - p).abs() < 0.02, "freq {freq} vs p {p}");
    }

    #[test]
    fn gate_update_touches_only_chosen_action() {
        let mut gate = WorkingMemoryGate::new(3);
        let rates = [1.0, 0.0, 2.0];
        let active = [0usize, 2];
        gate.update(&rates, &active, [0.0, 1.0], 2.0);
        assert_eq!(gate.w_gate.get(1, 0), 2e-4);
        assert_eq!(gate.w_gate.get(1, 2), 4e-4);
        assert!(gate.w_gate.row(0).iter().all(|&w| w == 0.0));
        // Zero TD error changes nothing.
        let before = gate.w_gate.clone();
        gate.update(&rates, &active, [1.0, 0.0], 0.0);
        assert_eq!(gate.w_gate, before);
    }
}
