//! One-shot cue-to-goal association memory.
//!
//! Two variants share one contract: a symbolic key-value matrix with
//! softmax recall, and a plastic readout over a nonlinear hidden layer
//! (feedforward or reservoir) trained by reward-gated rules. The recall
//! value (third readout component) tells the navigator whether to trust
//! the recalled coordinates.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{leaky_step, low_pass_step, relu, threshold_linear, IntegratorParams};
use crate::linalg::{active_indices, Mat};
use crate::reservoir::Reservoir;
use crate::rng::{stream, stream_rng};

/// Recall softmax inverse temperature.
pub const BETA_RECALL: f64 = 1.0;
/// Exploratory readout noise variance.
pub const SIGMA_GOAL_SQ: f64 = 0.05;
/// Default goal-readout learning rate.
pub const ETA_GOAL: f64 = 7.5e-5;

/// Readout learning rate for a hidden layer of `n` units: the quoted rate
/// up to the 512-unit operating point, scaled down inversely above it so
/// the per-step loop gain (eta times summed squared rates) stays bounded.
/// The source model applies the same kind of reduction at its largest size.
pub fn eta_goal_for(n: usize) -> f64 {
    ETA_GOAL * (512.0 / n as f64).min(1.0)
}
/// Default slot count for the key-value memory. Sized like the standalone
/// association experiment so that softmax leakage over unused slots stays
/// far below the navigation threshold even with every cue stored.
pub const KV_SLOTS: usize = 50;

/// What a recall returns: coordinates plus a confidence-like value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalReadout {
    pub x: f64,
    pub y: f64,
    pub recall_value: f64,
}

impl GoalReadout {
    pub fn zero() -> Self {
        Self { x: 0.0, y: 0.0, recall_value: 0.0 }
    }
}

/// Symbolic key-value memory: one slot per cue id, softmax recall over all
/// slots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyValueMemory {
    /// S x 18 stored cue vectors.
    pub keys: Mat,
    /// S x 3 stored [x, y, recall] rows.
    pub values: Mat,
    pub beta_recall: f64,
}

impl KeyValueMemory {
    pub fn new(slots: usize, cue_len: usize) -> Self {
        assert!(slots >= cue_len, "need at least one slot per cue id");
        Self {
            keys: Mat::zeros(slots, cue_len),
            values: Mat::zeros(slots, 3),
            beta_recall: BETA_RECALL,
        }
    }

    pub fn standard() -> Self {
        Self::new(KV_SLOTS, crate::environment::N_CUES)
    }

    fn slot_of(cue_id: u8) -> usize {
        cue_id as usize - 1
    }

    /// Store the cue vector and the coordinates at which reward was
    /// disbursed, overwriting any previous association for this cue.
    pub fn store(&mut self, cue_id: u8, cue: &[f64], p: [f64; 2]) {
        let slot = Self::slot_of(cue_id);
        self.keys.row_mut(slot).copy_from_slice(cue);
        let row = self.values.row_mut(slot);
        row[0] = p[0];
        row[1] = p[1];
        row[2] = 1.0;
    }

    /// Softmax attention over slots, then the attention-weighted value rows.
    pub fn recall(&self, cue: &[f64]) -> GoalReadout {
        let slots = self.keys.rows;
        let mut logits = vec![0.0; slots];
        for s in 0..slots {
            let key = self.keys.row(s);
            logits[s] = self.beta_recall
                * key.iter().zip(cue.iter()).map(|(k, c)| k * c).sum::<f64>();
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            denom += *l;
        }
        let mut g = [0.0; 3];
        for s in 0..slots {
            let a = logits[s] / denom;
            let row = self.values.row(s);
            g[0] += a * row[0];
            g[1] += a * row[1];
            g[2] += a * row[2];
        }
        GoalReadout { x: g[0], y: g[1], recall_value: g[2] }
    }

    /// Zero the association for a cue; deleting an absent cue is a no-op.
    pub fn delete(&mut self, cue_id: u8) {
        let slot = Self::slot_of(cue_id);
        self.keys.row_mut(slot).fill(0.0);
        self.values.row_mut(slot).fill(0.0);
    }

    pub fn stored_count(&self) -> usize {
        (0..self.values.rows).filter(|&s| self.values.get(s, 2) != 0.0).count()
    }
}

/// Target for the association rules: estimated coordinates plus the
/// step-transformed reward.
#[inline]
pub fn target_vector(p: [f64; 2], reward: f64) -> [f64; 3] {
    [p[0], p[1], if reward > 0.0 { 1.0 } else { 0.0 }]
}

/// Plastic three-unit readout over a hidden layer's rates, with the
/// exploratory-Hebbian, least-mean-square, and acetylcholine rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalReadoutUnit {
    /// 3 x N plastic weights, zero at birth.
    pub w_goal: Mat,
    /// Smooth readout (leaky-filtered noisy readout).
    pub g: [f64; 3],
    /// Most recent noisy readout.
    pub g_noisy: [f64; 3],
    /// Low-passed performance index for the EH modulatory factor.
    pub p_bar: f64,
    pub eta: f64,
    pub sigma_sq: f64,
    params: IntegratorParams,
}

impl GoalReadoutUnit {
    pub fn new(n_hidden: usize, eta: f64) -> Self {
        Self {
            w_goal: Mat::zeros(3, n_hidden),
            g: [0.0; 3],
            g_noisy: [0.0; 3],
            p_bar: 0.0,
            eta,
            sigma_sq: SIGMA_GOAL_SQ,
            params: IntegratorParams::standard(0.0),
        }
    }

    pub fn reset(&mut self) {
        self.g = [0.0; 3];
        self.g_noisy = [0.0; 3];
        self.p_bar = 0.0;
    }

    /// One readout step: the noisy readout is the weighted rates plus
    /// per-sample exploratory noise of amplitude sigma_goal; the smooth
    /// readout leaks toward it.
    pub fn step(&mut self, rates: &[f64], active: &[usize], rng: &mut ChaCha12Rng) -> GoalReadout {
        let noise_scale = self.sigma_sq.sqrt();
        for i in 0..3 {
            let row = self.w_goal.row(i);
            let mut acc = 0.0;
            for &j in active {
                acc += row[j] * rates[j];
            }
            let noise: f64 = rng.sample(StandardNormal);
            self.g_noisy[i] = acc + noise_scale * noise;
            self.g[i] = leaky_step(self.g[i], self.g_noisy[i], &self.params, 0.0);
        }
        GoalReadout { x: self.g[0], y: self.g[1], recall_value: self.g[2] }
    }

    /// Reward-modulated exploratory Hebbian rule. The modulatory factor
    /// compares the instantaneous performance (negative squared error of the
    /// noisy readout) against its own running low-pass, which is updated
    /// afterwards.
    pub fn eh_update(&mut self, rates: &[f64], active: &[usize], g_star: [f64; 3], reward: f64) {
        let p: f64 = -(0..3).map(|i| (g_star[i] - self.g_noisy[i]).powi(2)).sum::<f64>();
        let m = if self.p_bar < p { 1.0 } else { 0.0 };
        let theta = if reward > 0.0 { 1.0 } else { 0.0 };
        if m * theta != 0.0 {
            for i in 0..3 {
                let coeff = self.eta * (self.g_noisy[i] - self.g[i]);
                if coeff != 0.0 {
                    let row = self.w_goal.row_mut(i);
                    for &j in active {
                        row[j] += coeff * rates[j];
                    }
                }
            }
        }
        self.p_bar = low_pass_step(self.p_bar, p, self.params.tau_ms, self.params.dt_ms);
    }

    /// Reward-modulated least-mean-square rule.
    pub fn lms_update(&mut self, rates: &[f64], active: &[usize], g_star: [f64; 3], reward: f64) {
        if reward <= 0.0 {
            return;
        }
        for i in 0..3 {
            let coeff = self.eta * (g_star[i] - self.g[i]);
            if coeff != 0.0 {
                let row = self.w_goal.row_mut(i);
                for &j in active {
                    row[j] += coeff * rates[j];
                }
            }
        }
    }

    /// Acetylcholine-modulated depression: a constant-sign Hebbian decay of
    /// the readout weights, applied every step during navigation.
    pub fn ach_decay(&mut self, rates: &[f64], active: &[usize], omega: f64) {
        debug_assert!(omega >= 0.0);
        if omega == 0.0 {
            return;
        }
        for i in 0..3 {
            let coeff = -self.eta * omega * self.g[i];
            if coeff != 0.0 {
                let row = self.w_goal.row_mut(i);
                for &j in active {
                    row[j] += coeff * rates[j];
                }
            }
        }
    }
}

/// Hidden-layer architecture for the standalone association network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalArch {
    Feedforward,
    Reservoir,
}

/// Learning rule for the readout weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalRule {
    Eh,
    Lms,
}

/// Hidden activation choices; the reservoir defaults to the threshold-3
/// function and the feedforward layer to ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    ThresholdLinear,
    Relu,
}

/// Standalone association network: fixed random input weights into a
/// feedforward or reservoir hidden layer, plus the plastic 3-unit readout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalNetwork {
    pub arch: GoalArch,
    pub n: usize,
    reservoir: Option<Reservoir>,
    ff_w_in: Option<Mat>,
    ff_x: Vec<f64>,
    ff_activation: HiddenActivation,
    pub rates: Vec<f64>,
    active: Vec<usize>,
    pub readout: GoalReadoutUnit,
    params: IntegratorParams,
}

impl GoalNetwork {
    pub fn new(
        arch: GoalArch,
        n: usize,
        n_inputs: usize,
        eta: f64,
        structure_rng: &mut ChaCha12Rng,
    ) -> Self {
        // The feedforward input range is widened slightly so the threshold-3
        // activation fires on a sparse fraction of units, the same operating
        // point the reservoir sits at.
        let (reservoir, ff_w_in) = match arch {
            GoalArch::Reservoir => (Some(Reservoir::new(n, n_inputs, structure_rng)), None),
            GoalArch::Feedforward => (
                None,
                Some(Mat::from_fn(n, n_inputs, |_, _| structure_rng.gen_range(-1.5..1.5))),
            ),
        };
        Self {
            arch,
            n,
            reservoir,
            ff_w_in,
            ff_x: vec![0.0; n],
            ff_activation: HiddenActivation::ThresholdLinear,
            rates: vec![0.0; n],
            active: Vec::with_capacity(n),
            readout: GoalReadoutUnit::new(n, eta),
            params: IntegratorParams::standard(0.0),
        }
    }

    pub fn set_ff_activation(&mut self, act: HiddenActivation) {
        self.ff_activation = act;
    }

    /// Redraw hidden potentials from a Gaussian with variance 0.1 (the
    /// recall-phase reset) and clear the readout.
    pub fn reset_hidden(&mut self, rng: &mut ChaCha12Rng) {
        let std = 0.1f64.sqrt();
        match self.arch {
            GoalArch::Reservoir => self.reservoir.as_mut().unwrap().reset(std, rng),
            GoalArch::Feedforward => {
                for x in self.ff_x.iter_mut() {
                    *x = rng.sample::<f64, _>(StandardNormal) * std;
                }
            }
        }
        self.readout.reset();
    }

    /// One hidden + readout step with the cue clamped.
    pub fn step(&mut self, input: &[f64], rng: &mut ChaCha12Rng) -> GoalReadout {
        match self.arch {
            GoalArch::Reservoir => {
                let res = self.reservoir.as_mut().unwrap();
                res.step(input, rng);
                self.rates.copy_from_slice(&res.rates);
            }
            GoalArch::Feedforward => {
                let w = self.ff_w_in.as_ref().unwrap();
                for j in 0..self.n {
                    let row = w.row(j);
                    let mut drive = 0.0;
                    for (wi, &u) in row.iter().zip(input.iter()) {
                        if u != 0.0 {
                            drive += wi * u;
                        }
                    }
                    self.ff_x[j] = leaky_step(self.ff_x[j], drive, &self.params, 0.0);
                    self.rates[j] = match self.ff_activation {
                        HiddenActivation::ThresholdLinear => threshold_linear(self.ff_x[j]),
                        HiddenActivation::Relu => relu(self.ff_x[j]),
                    };
                }
            }
        }
        active_indices(&self.rates, &mut self.active);
        self.readout.step(&self.rates.clone(), &self.active.clone(), rng)
    }

    pub fn apply_rule(&mut self, rule: GoalRule, g_star: [f64; 3], reward: f64) {
        let rates = self.rates.clone();
        let active = self.active.clone();
        match rule {
            GoalRule::Eh => self.readout.eh_update(&rates, &active, g_star, reward),
            GoalRule::Lms => self.readout.lms_update(&rates, &active, g_star, reward),
        }
    }
}

/// One point of a capacity curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub n_assoc: usize,
    pub mse: f64,
}

const STEPS_PER_SECOND: usize = 50; // dt = 20 ms

/// Seconds of plasticity per association.
pub const ASSOC_PLASTIC_S: f64 = 5.0;
/// Seconds of maintenance (plasticity off) per association.
pub const ASSOC_MAINTAIN_S: f64 = 5.0;

fn clamp_cue(n_inputs: usize, cue_idx: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_inputs];
    v[cue_idx] = crate::environment::CUE_GAIN;
    v
}

/// Recall a cue and return the squared error of the time-averaged readout
/// against its target: a one-second settle, then a two-second window whose
/// mean readout is compared against the stored coordinates (averaging
/// removes the exploratory readout noise from the measurement).
fn recall_mse(
    net: &mut GoalNetwork,
    cue: &[f64],
    g_star: [f64; 3],
    rng: &mut ChaCha12Rng,
) -> f64 {
    net.reset_hidden(rng);
    for _ in 0..STEPS_PER_SECOND {
        net.step(cue, rng);
    }
    let window = 2 * STEPS_PER_SECOND;
    let mut mean = [0.0; 3];
    for _ in 0..window {
        let g = net.step(cue, rng);
        mean[0] += g.x;
        mean[1] += g.y;
        mean[2] += g.recall_value;
    }
    for m in mean.iter_mut() {
        *m /= window as f64;
    }
    ((mean[0] - g_star[0]).powi(2)
        + (mean[1] - g_star[1]).powi(2)
        + (mean[2] - g_star[2]).powi(2))
        / 3.0
}

/// The standalone capacity protocol: store `n_assoc_max` one-hot-cue to
/// coordinate associations one after another (plasticity on for five
/// seconds, off for five), probing recall of everything stored so far after
/// each association. Returns the recall MSE as a function of the number of
/// stored associations.
pub fn capacity_experiment(
    arch: GoalArch,
    rule: GoalRule,
    n_units: usize,
    n_assoc_max: usize,
    seed: u64,
) -> Vec<CapacityPoint> {
    let mut structure = stream_rng(seed, stream::STRUCTURE);
    let mut noise = stream_rng(seed, stream::GOAL);
    let mut targets_rng = stream_rng(seed, stream::SCHEDULE);

    let n_inputs = n_assoc_max;
    let mut net =
        GoalNetwork::new(arch, n_units, n_inputs, eta_goal_for(n_units), &mut structure);

    let targets: Vec<[f64; 3]> = (0..n_assoc_max)
        .map(|_| {
            [targets_rng.gen_range(-1.0..1.0), targets_rng.gen_range(-1.0..1.0), 1.0]
        })
        .collect();

    let mut curve = Vec::with_capacity(n_assoc_max);
    for k in 0..n_assoc_max {
        let cue = clamp_cue(n_inputs, k);
        // Association phase: plasticity on.
        for _ in 0..(ASSOC_PLASTIC_S * STEPS_PER_SECOND as f64) as usize {
            net.step(&cue, &mut noise);
            net.apply_rule(rule, targets[k], 1.0);
        }
        // Maintenance phase: plasticity off.
        for _ in 0..(ASSOC_MAINTAIN_S * STEPS_PER_SECOND as f64) as usize {
            net.step(&cue, &mut noise);
        }
        // Recall phase over everything stored so far.
        let mut total = 0.0;
        for j in 0..=k {
            let cue_j = clamp_cue(n_inputs, j);
            total += recall_mse(&mut net, &cue_j, targets[j], &mut noise);
        }
        curve.push(CapacityPoint { n_assoc: k + 1, mse: total / (k + 1) as f64 });
    }
    curve
}

/// Area under a capacity curve (plain sum of MSE over association counts).
pub fn capacity_auc(curve: &[CapacityPoint]) -> f64 {
    curve.iter().map(|p| p.mse).sum()
}

/// Outcome of the write/delete isolation protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WriteDeleteOutcome {
    /// Recall value of each deleted cue after its depression window,
    /// paired with the acetylcholine level used.
    pub recall_after_delete: Vec<(f64, f64)>,
    pub cue4_mse_before: f64,
    pub cue4_mse_after: f64,
}

/// Store four cue-coordinate associations with the EH rule, then depress
/// cues 1..3 with descending acetylcholine levels and check that cue 4 is
/// untouched. `ach_window_s` is the depression duration per cue.
pub fn write_delete_experiment(
    n_units: usize,
    omegas: [f64; 3],
    ach_window_s: f64,
    seed: u64,
) -> WriteDeleteOutcome {
    let mut structure = stream_rng(seed, stream::STRUCTURE);
    let mut noise = stream_rng(seed, stream::GOAL);
    let mut targets_rng = stream_rng(seed, stream::SCHEDULE);

    let n_inputs = 4;
    let mut net = GoalNetwork::new(
        GoalArch::Reservoir,
        n_units,
        n_inputs,
        eta_goal_for(n_units),
        &mut structure,
    );
    let targets: Vec<[f64; 3]> = (0..4)
        .map(|_| [targets_rng.gen_range(-1.0..1.0), targets_rng.gen_range(-1.0..1.0), 1.0])
        .collect();

    for k in 0..4 {
        let cue = clamp_cue(n_inputs, k);
        for _ in 0..(ASSOC_PLASTIC_S * STEPS_PER_SECOND as f64) as usize {
            net.step(&cue, &mut noise);
            net.apply_rule(GoalRule::Eh, targets[k], 1.0);
        }
        for _ in 0..(ASSOC_MAINTAIN_S * STEPS_PER_SECOND as f64) as usize {
            net.step(&cue, &mut noise);
        }
    }

    let cue4 = clamp_cue(n_inputs, 3);
    let cue4_mse_before = recall_mse(&mut net, &cue4, targets[3], &mut noise);

    let mut recall_after_delete = Vec::new();
    for (k, &omega) in omegas.iter().enumerate() {
        let cue = clamp_cue(n_inputs, k);
        net.reset_hidden(&mut noise);
        for _ in 0..(ach_window_s * STEPS_PER_SECOND as f64) as usize {
            net.step(&cue, &mut noise);
            let rates = net.rates.clone();
            let active = net.active.clone();
            net.readout.ach_decay(&rates, &active, omega);
        }
        // Report the surviving recall value: depression drives it from ~1
        // toward 0, faster for higher acetylcholine.
        let mut recall = 0.0;
        net.reset_hidden(&mut noise);
        for _ in 0..STEPS_PER_SECOND {
            net.step(&cue, &mut noise);
        }
        for _ in 0..STEPS_PER_SECOND {
            recall += net.step(&cue, &mut noise).recall_value;
        }
        recall /= STEPS_PER_SECOND as f64;
        recall_after_delete.push((omega, recall));
    }

    let cue4_mse_after = recall_mse(&mut net, &cue4, targets[3], &mut noise);
    WriteDeleteOutcome { recall_after_delete, cue4_mse_before, cue4_mse_after }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gain3(cue_id: u8) -> Vec<f64> {
        let mut v = vec![0.0; crate::environment::N_CUES];
        v[cue_id as usize - 1] = 3.0;
        v
    }

    #[test]
    fn kv_store_then_recall_leakage_matches_softmax_arithmetic() {
        // With 18 slots the matched logit is 9 and the attention on the
        // stored row is e^9 / (e^9 + 17).
        let mut mem = KeyValueMemory::new(18, 18);
        mem.store(7, &gain3(7), [0.4, -0.2]);
        let g = mem.recall(&gain3(7));
        let expect = 9f64.exp() / (9f64.exp() + 17.0);
        assert_relative_eq!(g.recall_value, expect, epsilon = 1e-12);
        assert!((g.recall_value - 0.998).abs() < 1e-3);
        assert!((g.x - 0.4).abs() < 1e-2 && (g.y + 0.2).abs() < 1e-2);
    }

    #[test]
    fn kv_empty_recall_is_suppressed() {
        let mem = KeyValueMemory::standard();
        let g = mem.recall(&gain3(3));
        assert_eq!(g.recall_value, 0.0);
        assert_eq!(g.x, 0.0);
    }

    #[test]
    fn kv_overwrite_takes_latest() {
        let mut mem = KeyValueMemory::standard();
        mem.store(5, &gain3(5), [0.1, 0.1]);
        mem.store(5, &gain3(5), [-0.3, 0.6]);
        let g = mem.recall(&gain3(5));
        assert!((g.x + 0.3).abs() < 1e-2 && (g.y - 0.6).abs() < 1e-2);
        assert_eq!(mem.stored_count(), 1);
    }

    #[test]
    fn kv_store_isolation_is_exact() {
        let mut mem = KeyValueMemory::standard();
        mem.store(2, &gain3(2), [0.2, 0.2]);
        let before_k = mem.keys.row(1).to_vec();
        let before_v = mem.values.row(1).to_vec();
        mem.store(7, &gain3(7), [0.4, -0.2]);
        assert_eq!(mem.keys.row(1), &before_k[..]);
        assert_eq!(mem.values.row(1), &before_v[..]);
    }

    #[test]
    fn kv_delete_suppresses_and_is_idempotent() {
        let mut mem = KeyValueMemory::standard();
        mem.store(4, &gain3(4), [0.0, 0.5]);
        mem.store(8, &gain3(8), [0.5, 0.0]);
        mem.delete(8);
        let g = mem.recall(&gain3(8));
        assert!(g.recall_value < 0.6);
        // Cue 4 is untouched.
        let g4 = mem.recall(&gain3(4));
        assert!(g4.recall_value > 0.99);
        let snapshot = mem.values.clone();
        mem.delete(8);
        assert_eq!(mem.values, snapshot);
        // Deleting a never-stored cue is a no-op too.
        mem.delete(11);
        assert_eq!(mem.values, snapshot);
    }

    #[test]
    fn kv_unseen_cue_stays_suppressed_with_many_rows_stored() {
        let mut mem = KeyValueMemory::standard();
        for cue in 1..=17u8 {
            mem.store(cue, &gain3(cue), [0.1, 0.1]);
        }
        let g = mem.recall(&gain3(18));
        assert!(
            g.recall_value < 0.6,
            "phantom recall {} must stay below threshold",
            g.recall_value
        );
    }

    #[test]
    fn target_vector_step_function() {
        assert_eq!(target_vector([0.3, -0.1], 5.0), [0.3, -0.1, 1.0]);
        assert_eq!(target_vector([0.3, -0.1], 0.0), [0.3, -0.1, 0.0]);
        assert_eq!(target_vector([0.3, -0.1], -1.0), [0.3, -0.1, 0.0]);
    }

    #[test]
    fn readout_tracks_fixed_point_without_noise() {
        let mut unit = GoalReadoutUnit::new(4, ETA_GOAL);
        unit.sigma_sq = 0.0;
        for j in 0..4 {
            unit.w_goal.set(0, j, 0.5);
        }
        let rates = [1.0, 2.0, 0.0, 1.0];
        let active = [0usize, 1, 3];
        let mut rng = stream_rng(1, stream::GOAL);
        for _ in 0..400 {
            unit.step(&rates, &active, &mut rng);
        }
        assert_relative_eq!(unit.g[0], 2.0, epsilon = 1e-6);
        assert_relative_eq!(unit.g[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn readout_g_tracks_g_noisy_geometrically() {
        let mut unit = GoalReadoutUnit::new(2, ETA_GOAL);
        unit.sigma_sq = 0.0;
        unit.w_goal.set(0, 0, 1.0);
        let mut rng = stream_rng(2, stream::GOAL);
        let rates = [3.0, 0.0];
        let active = [0usize];
        unit.step(&rates, &active, &mut rng);
        let mut gap_prev = (unit.g[0] - unit.g_noisy[0]).abs();
        for _ in 0..10 {
            unit.step(&rates, &active, &mut rng);
            let gap = (unit.g[0] - unit.g_noisy[0]).abs();
            assert_relative_eq!(gap, gap_prev * 0.8, epsilon = 1e-10);
            gap_prev = gap;
        }
    }

    #[test]
    fn eh_gates_on_reward_and_performance() {
        let mut unit = GoalReadoutUnit::new(2, 7.5e-5);
        unit.g_noisy = [0.1, 0.0, 0.0];
        unit.g = [0.0, 0.0, 0.0];
        unit.p_bar = -10.0; // far below any P, so M = 1
        let rates = [1.0, 0.0];
        let active = [0usize];
        // No reward: no change regardless of everything else.
        unit.eh_update(&rates, &active, [1.0, 0.0, 0.0], 0.0);
        assert!(unit.w_goal.data.iter().all(|&w| w == 0.0));
        // Rewarded and improving: the scalar-case arithmetic.
        unit.p_bar = -10.0;
        unit.eh_update(&rates, &active, [1.0, 0.0, 0.0], 5.0);
        assert_relative_eq!(unit.w_goal.get(0, 0), 7.5e-6, epsilon = 1e-18);
        // Performance below the running average: M = 0, no change.
        let before = unit.w_goal.clone();
        unit.p_bar = 10.0;
        unit.eh_update(&rates, &active, [1.0, 0.0, 0.0], 5.0);
        assert_eq!(unit.w_goal, before);
    }

    #[test]
    fn eh_never_updates_without_reward_fuzz() {
        let mut unit = GoalReadoutUnit::new(8, ETA_GOAL);
        let mut rng = stream_rng(3, stream::GOAL);
        let active: Vec<usize> = (0..8).collect();
        for _ in 0..200 {
            let rates: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..5.0)).collect();
            unit.g_noisy = [rng.gen(), rng.gen(), rng.gen()];
            unit.g = [rng.gen(), rng.gen(), rng.gen()];
            unit.p_bar = rng.gen_range(-5.0..5.0);
            let g_star = [rng.gen(), rng.gen(), rng.gen()];
            unit.eh_update(&rates, &active, g_star, -rng.gen::<f64>());
            assert!(unit.w_goal.data.iter().all(|&w| w == 0.0));
        }
    }

    #[test]
    fn lms_zero_error_or_no_reward_is_inert() {
        let mut unit = GoalReadoutUnit::new(2, ETA_GOAL);
        let rates = [1.0, 1.0];
        let active = [0usize, 1];
        unit.g = [0.5, -0.5, 1.0];
        unit.lms_update(&rates, &active, [0.5, -0.5, 1.0], 5.0);
        assert!(unit.w_goal.data.iter().all(|&w| w == 0.0));
        unit.lms_update(&rates, &active, [1.0, 1.0, 1.0], 0.0);
        assert!(unit.w_goal.data.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn ach_decay_needs_nonzero_readout() {
        let mut unit = GoalReadoutUnit::new(2, ETA_GOAL);
        unit.g = [0.0; 3];
        unit.ach_decay(&[1.0, 1.0], &[0, 1], 0.1);
        assert!(unit.w_goal.data.iter().all(|&w| w == 0.0));
        unit.g = [1.0, 0.0, 0.0];
        unit.ach_decay(&[1.0, 0.0], &[0], 0.1);
        assert!(unit.w_goal.get(0, 0) < 0.0);
    }

    #[test]
    fn single_association_lms_converges() {
        let curve = capacity_experiment(GoalArch::Feedforward, GoalRule::Lms, 128, 1, 11);
        assert!(curve[0].mse < 0.01, "one-association LMS recall mse = {}", curve[0].mse);
    }
}
