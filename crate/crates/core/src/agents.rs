//! Agent composition: wiring dynamics, memory, and navigation into the six
//! agent configurations, plus the trial lifecycle that drives one agent
//! through one trial of a task.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::DT_MS;
use crate::environment::schedule::TrialPlan;
use crate::environment::{
    cue_vector, step_position, Arena, PlaceCellField, RewardState, GOAL_ZONE_RADIUS, N_CUES,
    N_PLACE_CELLS, REWARD_RADIUS,
};
use crate::goal_memory::{
    target_vector, GoalReadout, GoalReadoutUnit, GoalRule, KeyValueMemory,
};
use crate::linalg::active_indices;
use crate::metric_map::{pi_td_error, CoordinateMap};
use crate::navigator::{goal_vector, NavNet, SymbolicNavigator, RECALL_THRESHOLD};
use crate::reservoir::{
    td_error, update_actor, update_critic, ActorRing, Critic, Reservoir, TdParams, N_ACTOR,
};
use crate::rng::{stream, stream_rng};
use crate::working_memory::{BumpAttractor, GateDecision, WorkingMemoryGate, N_BUMP};

/// Simulation step in seconds.
pub const DT_S: f64 = DT_MS / 1000.0;
/// Reset width for reservoir and bump potentials at trial start.
const RESET_STD: f64 = 0.31622776601683794; // sqrt(0.1)

/// The six agent architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "actor_critic")]
    ActorCritic,
    #[serde(rename = "symbolic")]
    SymbolicSchema,
    #[serde(rename = "neural")]
    NeuralSchema,
    #[serde(rename = "hybrid_symbolic")]
    HybridSymbolic,
    #[serde(rename = "hybrid_neural")]
    HybridNeural,
    #[serde(rename = "wm_gated")]
    WmGatedHybrid,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::ActorCritic,
        AgentKind::SymbolicSchema,
        AgentKind::NeuralSchema,
        AgentKind::HybridSymbolic,
        AgentKind::HybridNeural,
        AgentKind::WmGatedHybrid,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AgentKind::ActorCritic => "actor_critic",
            AgentKind::SymbolicSchema => "symbolic",
            AgentKind::NeuralSchema => "neural",
            AgentKind::HybridSymbolic => "hybrid_symbolic",
            AgentKind::HybridNeural => "hybrid_neural",
            AgentKind::WmGatedHybrid => "wm_gated",
        }
    }

    pub fn has_reservoir(self) -> bool {
        !matches!(self, AgentKind::SymbolicSchema)
    }

    pub fn has_critic(self) -> bool {
        matches!(
            self,
            AgentKind::ActorCritic
                | AgentKind::HybridSymbolic
                | AgentKind::HybridNeural
                | AgentKind::WmGatedHybrid
        )
    }

    pub fn has_coord(self) -> bool {
        self != AgentKind::ActorCritic
    }

    pub fn uses_kv(self) -> bool {
        matches!(self, AgentKind::SymbolicSchema | AgentKind::HybridSymbolic)
    }

    pub fn uses_goal_readout(self) -> bool {
        matches!(
            self,
            AgentKind::NeuralSchema | AgentKind::HybridNeural | AgentKind::WmGatedHybrid
        )
    }

    pub fn has_wm(self) -> bool {
        self == AgentKind::WmGatedHybrid
    }

    /// Pure agents have a pinned mixing coefficient.
    pub fn fixed_beta(self) -> Option<f64> {
        match self {
            AgentKind::ActorCritic => Some(0.0),
            AgentKind::SymbolicSchema | AgentKind::NeuralSchema => Some(1.0),
            _ => None,
        }
    }
}

/// Which navigation implementation a schema agent runs.
#[derive(Debug, Clone)]
pub enum NavRoute {
    Symbolic(SymbolicNavigator),
    Network(Arc<NavNet>),
}

/// Per-subsystem plasticity switches.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlasticityFlags {
    pub coord: bool,
    pub goal: bool,
    pub actor_critic: bool,
    pub gate: bool,
}

impl Default for PlasticityFlags {
    fn default() -> Self {
        Self { coord: true, goal: true, actor_critic: true, gate: true }
    }
}

/// Everything needed to build an agent.
#[derive(Debug, Clone)]
pub struct AgentParams {
    pub kind: AgentKind,
    pub beta_control: f64,
    pub reservoir_n: usize,
    pub goal_rule: GoalRule,
    pub eta_goal: f64,
    pub omega_ach: f64,
    pub td: TdParams,
    pub plasticity: PlasticityFlags,
    /// None selects the symbolic navigator.
    pub nav_net: Option<Arc<NavNet>>,
    pub seed: u64,
}

impl AgentParams {
    pub fn new(kind: AgentKind, seed: u64) -> Self {
        Self {
            kind,
            beta_control: kind.fixed_beta().unwrap_or(0.3),
            reservoir_n: 512,
            goal_rule: GoalRule::Eh,
            eta_goal: crate::goal_memory::ETA_GOAL,
            omega_ach: 0.0005,
            td: TdParams::new(3000.0, DT_MS, 0.0002, 0.00005),
            plasticity: PlasticityFlags::default(),
            nav_net: None,
            seed,
        }
    }
}

/// What the agent sees on one tick.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub pc: &'a [f64],
    pub cue_vec: &'a [f64],
    /// The trial's task cue id (for the key-value slot), 0 if none.
    pub cue_id: u8,
    pub reward_rate: f64,
    pub a_hat: [f64; 2],
    /// Cue-presentation silencing: actions are forced to zero.
    pub silenced: bool,
    /// Probe trials freeze all plasticity and memory deletion.
    pub frozen: bool,
}

/// Per-step diagnostics the harness can sample.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepDiag {
    pub delta_da: f64,
    pub delta_coord: [f64; 2],
    pub recall: f64,
    pub p_update: f64,
    pub chi: bool,
    pub p_estimate: [f64; 2],
}

/// A full agent instance: subsystems, plastic weights, and RNG streams.
#[derive(Debug, Clone)]
pub struct Agent {
    pub params: AgentParams,
    pub reservoir: Option<Reservoir>,
    pub actor: ActorRing,
    pub critic: Option<Critic>,
    pub coord: Option<CoordinateMap>,
    pub kv: Option<KeyValueMemory>,
    pub goal: Option<GoalReadoutUnit>,
    pub nav: Option<NavRoute>,
    pub bump: Option<BumpAttractor>,
    pub gate: Option<WorkingMemoryGate>,

    rng_reservoir: ChaCha12Rng,
    rng_actor: ChaCha12Rng,
    rng_critic: ChaCha12Rng,
    rng_coord: ChaCha12Rng,
    rng_goal: ChaCha12Rng,
    rng_bump: ChaCha12Rng,
    rng_gate: ChaCha12Rng,
    rng_reset: ChaCha12Rng,

    input_buf: Vec<f64>,
    q_nav_buf: Vec<f64>,
    active_buf: Vec<usize>,
    empty_rates: Vec<f64>,

    v_prev: f64,
    reward_rate_prev: f64,
    consuming: bool,
    rewarded_this_trial: bool,
    /// Accumulated seconds spent at the recalled goal without reward; the
    /// association is deleted as stale once this passes one second.
    stale_dwell_s: f64,
    /// Seconds since the reward was triggered this trial.
    consume_elapsed_s: f64,
    /// Seconds since trial start.
    trial_elapsed_s: f64,
    /// Key-value store deferred until the coordinate estimate has settled
    /// at the goal during the consummatory freeze.
    pending_store: Option<u8>,
    last_gate: GateDecision,
    pub steps_taken: u64,
    pub diag: StepDiag,
}

impl Agent {
    pub fn build(params: AgentParams) -> Self {
        let kind = params.kind;
        let mut structure = stream_rng(params.seed, stream::STRUCTURE);
        let n = params.reservoir_n;
        let n_inputs =
            N_PLACE_CELLS + N_CUES + if kind.has_wm() { N_BUMP } else { 0 };
        let reservoir =
            kind.has_reservoir().then(|| Reservoir::new(n, n_inputs, &mut structure));
        let actor = ActorRing::new(if kind.has_reservoir() { n } else { 0 });
        let critic = kind.has_critic().then(|| Critic::new(n));
        let coord = kind.has_coord().then(|| CoordinateMap::new(N_PLACE_CELLS));
        let kv = kind.uses_kv().then(KeyValueMemory::standard);
        let goal =
            kind.uses_goal_readout().then(|| GoalReadoutUnit::new(n, params.eta_goal));
        let nav = kind.has_coord().then(|| match &params.nav_net {
            Some(net) => NavRoute::Network(net.clone()),
            None => NavRoute::Symbolic(SymbolicNavigator::new()),
        });
        let bump = kind.has_wm().then(BumpAttractor::new);
        let gate = kind.has_wm().then(|| WorkingMemoryGate::new(n));

        let seed = params.seed;
        Self {
            reservoir,
            actor,
            critic,
            coord,
            kv,
            goal,
            nav,
            bump,
            gate,
            rng_reservoir: stream_rng(seed, stream::RESERVOIR),
            rng_actor: stream_rng(seed, stream::ACTOR),
            rng_critic: stream_rng(seed, stream::CRITIC),
            rng_coord: stream_rng(seed, stream::COORD),
            rng_goal: stream_rng(seed, stream::GOAL),
            rng_bump: stream_rng(seed, stream::BUMP),
            rng_gate: stream_rng(seed, stream::GATE),
            rng_reset: stream_rng(seed, stream::RESET),
            input_buf: vec![0.0; n_inputs],
            q_nav_buf: vec![0.0; N_ACTOR],
            active_buf: Vec::with_capacity(n),
            empty_rates: Vec::new(),
            v_prev: 0.0,
            reward_rate_prev: 0.0,
            consuming: false,
            rewarded_this_trial: false,
            stale_dwell_s: 0.0,
            consume_elapsed_s: 0.0,
            trial_elapsed_s: 0.0,
            pending_store: None,
            last_gate: GateDecision { pi: [1.0, 0.0], chi: false, p_update: 0.5 },
            steps_taken: 0,
            params,
            diag: StepDiag::default(),
        }
    }

    /// Estimated coordinates (zero for the pure actor-critic).
    pub fn position_estimate(&self) -> [f64; 2] {
        self.coord.as_ref().map(|c| c.p).unwrap_or([0.0, 0.0])
    }

    /// Trial-start reset: coordinate estimate to the origin, reservoir and
    /// bump potentials redrawn, readouts and clocks cleared.
    pub fn on_trial_start(&mut self) {
        if let Some(coord) = &mut self.coord {
            coord.reset();
        }
        if let Some(res) = &mut self.reservoir {
            res.reset(RESET_STD, &mut self.rng_reset);
        }
        if let Some(bump) = &mut self.bump {
            bump.reset(RESET_STD, &mut self.rng_reset);
        }
        if let Some(gate) = &mut self.gate {
            gate.reset();
        }
        if let Some(goal) = &mut self.goal {
            goal.reset();
        }
        if let Some(critic) = &mut self.critic {
            critic.reset();
        }
        self.actor.reset();
        self.v_prev = 0.0;
        self.reward_rate_prev = 0.0;
        self.consuming = false;
        self.rewarded_this_trial = false;
        self.stale_dwell_s = 0.0;
        self.consume_elapsed_s = 0.0;
        self.trial_elapsed_s = 0.0;
        self.pending_store = None;
        self.last_gate = GateDecision { pi: [1.0, 0.0], chi: false, p_update: 0.5 };
    }

    /// Reward was disbursed at the agent's current location: freeze movement
    /// for consumption and schedule the symbolic store. The store itself
    /// waits half a second so the coordinate estimate (which lags a moving
    /// agent) settles onto the goal before being written.
    pub fn on_reward(&mut self, cue_id: u8, _cue_vec: &[f64]) {
        self.consuming = true;
        self.rewarded_this_trial = true;
        self.consume_elapsed_s = 0.0;
        if self.kv.is_some() && cue_id != 0 {
            self.pending_store = Some(cue_id);
        }
    }

    /// Unrewarded trial end deletes the symbolic association for the cue.
    pub fn on_trial_end(&mut self, cue_id: u8, rewarded: bool, frozen: bool) {
        if frozen || rewarded || cue_id == 0 {
            return;
        }
        if let Some(kv) = &mut self.kv {
            kv.delete(cue_id);
        }
    }

    /// One 20 ms tick. Returns the commanded velocity (m/s).
    pub fn step(&mut self, obs: &Observation) -> [f64; 2] {
        self.steps_taken += 1;
        self.trial_elapsed_s += DT_S;
        let beta = self.params.beta_control;
        if self.consuming {
            self.consume_elapsed_s += DT_S;
        }

        // (1) Working-memory gate and bump, reading last tick's rates.
        if let (Some(gate), Some(bump)) = (&mut self.gate, &mut self.bump) {
            let (rates, active): (&[f64], &[usize]) = match &self.reservoir {
                Some(res) => (&res.rates, &self.active_buf),
                None => (&self.empty_rates, &[]),
            };
            gate.step(rates, active, &mut self.rng_gate);
            let decision = gate.policy(&mut self.rng_gate);
            bump.step(obs.cue_vec, decision.chi, &mut self.rng_bump);
            self.last_gate = decision;
            self.diag.p_update = decision.p_update;
            self.diag.chi = decision.chi;
        }

        // (2) Reservoir.
        if let Some(res) = &mut self.reservoir {
            let pc_len = obs.pc.len();
            self.input_buf[..pc_len].copy_from_slice(obs.pc);
            self.input_buf[pc_len..pc_len + N_CUES].copy_from_slice(obs.cue_vec);
            if let Some(bump) = &self.bump {
                self.input_buf[pc_len + N_CUES..].copy_from_slice(&bump.rates);
            }
            res.step(&self.input_buf, &mut self.rng_reservoir);
            active_indices(&res.rates, &mut self.active_buf);
        }

        // (3) Coordinate cells and path-integration learning.
        if let Some(coord) = &mut self.coord {
            let p_prev = coord.p;
            coord.coord_step(obs.pc, &mut self.rng_coord);
            let delta = pi_td_error(coord.p, p_prev, obs.a_hat);
            self.diag.delta_coord = delta;
            // The first second after the per-trial reset is a re-anchoring
            // transient of the estimate, not navigation experience; learning
            // through it drags the map toward the origin.
            if self.params.plasticity.coord && !obs.frozen && self.trial_elapsed_s >= 1.0 {
                coord.trace_step(obs.pc);
                coord.update(delta);
            }
        }
        let p_est = self.position_estimate();
        self.diag.p_estimate = p_est;

        if let Some(cue_id) = self.pending_store {
            if self.consume_elapsed_s >= 0.5 {
                if let Some(kv) = &mut self.kv {
                    kv.store(cue_id, obs.cue_vec, p_est);
                }
                self.pending_store = None;
            }
        }

        // (4) Goal memory: recall, then learn or decay.
        let recall = if let Some(kv) = &mut self.kv {
            let g = kv.recall(obs.cue_vec);
            // Reaching the recalled coordinates without reward marks the
            // association stale. Arrival is accumulated dwell time near the
            // recalled point (the estimate lags true position at speed, so
            // a single proximity sample would misfire on near-miss sweeps).
            if !obs.frozen
                && !self.rewarded_this_trial
                && obs.reward_rate == 0.0
                && obs.cue_id != 0
                && g.recall_value > RECALL_THRESHOLD
            {
                let dx = p_est[0] - g.x;
                let dy = p_est[1] - g.y;
                if (dx * dx + dy * dy).sqrt() <= 2.0 * REWARD_RADIUS {
                    self.stale_dwell_s += DT_S;
                }
                if self.stale_dwell_s >= 1.0 {
                    kv.delete(obs.cue_id);
                    self.stale_dwell_s = 0.0;
                }
            }
            g
        } else if let Some(goal) = &mut self.goal {
            let res = self.reservoir.as_ref().expect("goal readout needs a reservoir");
            let g = goal.step(&res.rates, &self.active_buf, &mut self.rng_goal);
            if self.params.plasticity.goal && !obs.frozen {
                let g_star = target_vector(p_est, obs.reward_rate);
                match self.params.goal_rule {
                    GoalRule::Eh => {
                        goal.eh_update(&res.rates, &self.active_buf, g_star, obs.reward_rate)
                    }
                    GoalRule::Lms => {
                        goal.lms_update(&res.rates, &self.active_buf, g_star, obs.reward_rate)
                    }
                }
                if obs.reward_rate <= 0.0 {
                    goal.ach_decay(&res.rates, &self.active_buf, self.params.omega_ach);
                }
            }
            g
        } else {
            GoalReadout::zero()
        };
        self.diag.recall = recall.recall_value;

        // (5) Navigator.
        match &self.nav {
            Some(NavRoute::Symbolic(nav)) => {
                let d = goal_vector([recall.x, recall.y], p_est);
                nav.output(d, recall.recall_value, &mut self.q_nav_buf);
            }
            Some(NavRoute::Network(net)) => {
                net.forward(p_est, [recall.x, recall.y], recall.recall_value, &mut self.q_nav_buf);
            }
            None => self.q_nav_buf.fill(0.0),
        }

        // (6) Actor ring with beta mixing.
        {
            let (rates, active): (&[f64], &[usize]) = match &self.reservoir {
                Some(res) => (&res.rates, &self.active_buf),
                None => (&self.empty_rates, &[]),
            };
            self.actor.step(rates, active, &self.q_nav_buf, beta, &mut self.rng_actor);
        }

        // (7) Critic and TD error.
        let mut delta = 0.0;
        if let Some(critic) = &mut self.critic {
            let res = self.reservoir.as_ref().expect("critic needs a reservoir");
            let v_now = critic.step(&res.rates, &self.active_buf, &mut self.rng_critic);
            delta = td_error(v_now, self.v_prev, self.reward_rate_prev, self.params.td.alpha_g);
            self.v_prev = v_now;
        }
        self.diag.delta_da = delta;

        // (8) Plasticity: critic, actor, gate.
        if !obs.frozen && self.params.plasticity.actor_critic {
            if let Some(critic) = &mut self.critic {
                let res = self.reservoir.as_ref().unwrap();
                update_critic(
                    &mut critic.w_critic,
                    &res.rates,
                    &self.active_buf,
                    delta,
                    self.params.td.eta_critic,
                );
                update_actor(
                    &mut self.actor.w_actor,
                    &res.rates,
                    &self.actor.rho.clone(),
                    delta,
                    self.params.td.eta_actor,
                );
            }
        }
        if !obs.frozen && self.params.plasticity.gate {
            if let Some(gate) = &mut self.gate {
                let res = self.reservoir.as_ref().unwrap();
                gate.update(&res.rates, &self.active_buf, self.last_gate.pi, delta);
            }
        }
        self.reward_rate_prev = obs.reward_rate;

        // (9) Action, zeroed while consuming reward or silenced.
        if self.consuming || obs.silenced {
            return [0.0, 0.0];
        }
        let a = self.actor.action();
        // The ring readout is the displacement covered in one tick.
        [a[0] / DT_S, a[1] / DT_S]
    }
}

/// Recording switches for a trial run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecordOpts {
    pub trajectory: bool,
    pub gate_trace: bool,
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub cue: u8,
    pub reward_rate: f64,
}

/// One gate-trace sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GateSample {
    pub t: f64,
    pub p_update: f64,
    pub chi: u8,
    pub delta_da: f64,
    pub cue_on: u8,
}

/// Everything measured over one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub latency_s: f64,
    pub rewarded: bool,
    pub steps: usize,
    /// Seconds spent within 0.1 m of each goal in the candidate set.
    pub zone_times: Vec<f64>,
    /// Seconds spent within 0.1 m of this trial's own goal.
    pub time_at_goal: f64,
    pub path_length: f64,
    pub mean_abs_delta_coord: f64,
    pub trajectory: Vec<TrajPoint>,
    pub gate_trace: Vec<GateSample>,
}

/// Run one trial: the agent starts at the planned wall midpoint and the
/// loop alternates observation, agent step, and motion until the stop rule
/// fires.
pub fn run_trial(
    agent: &mut Agent,
    arena: &Arena,
    field: &PlaceCellField,
    trial: &TrialPlan,
    reward_r: f64,
    goal_set: &[(u8, usize)],
    record: RecordOpts,
) -> TrialOutcome {
    agent.on_trial_start();
    let goal = arena.reward_sites[trial.goal_site];
    let mut s = trial.start.start_position();
    let mut reward = RewardState::new();

    let mut pc = vec![0.0; N_PLACE_CELLS];
    let mut cue_vec = vec![0.0; N_CUES];
    let mut a_hat = [0.0, 0.0];
    let mut t = 0.0;
    let mut rate = 0.0;

    let mut zone_times = vec![0.0; goal_set.len()];
    let mut time_at_goal = 0.0;
    let mut path_length = 0.0;
    let mut latency = trial.t_max_s;
    let mut rewarded = false;
    let mut steps = 0usize;
    let mut delta_coord_sum = 0.0;
    let mut trajectory = Vec::new();
    let mut gate_trace = Vec::new();

    loop {
        // Compose the cue vector: task cue inside its window, distractors on
        // top of (or after) it.
        cue_vec.fill(0.0);
        let cue_on = t >= trial.cue_timing.onset_s && t < trial.cue_timing.offset_s;
        if cue_on {
            cue_vector(trial.cue, &mut cue_vec);
        }
        let mut any_cue_on = cue_on;
        for d in &trial.distractors {
            if t >= d.onset_s && t < d.onset_s + d.duration_s {
                cue_vec[d.cue as usize - 1] = crate::environment::CUE_GAIN;
                any_cue_on = true;
            }
        }
        let silenced = trial.cue_timing.silence_during_cue && cue_on;
        if silenced {
            pc.fill(0.0);
        } else {
            field.activity(s, &mut pc);
        }

        let obs = Observation {
            pc: &pc,
            cue_vec: &cue_vec,
            cue_id: trial.cue,
            reward_rate: rate,
            a_hat,
            silenced,
            frozen: trial.probe,
        };
        let velocity = agent.step(&obs);
        let (s_next, realized) = step_position(s, velocity, DT_S, arena);
        a_hat = realized;
        path_length += (realized[0] * realized[0] + realized[1] * realized[1]).sqrt();
        s = s_next;
        t += DT_S;
        steps += 1;
        delta_coord_sum +=
            (agent.diag.delta_coord[0].abs() + agent.diag.delta_coord[1].abs()) / 2.0;

        // Reward trigger on entering the goal circle.
        if !trial.probe && !rewarded {
            let dx = s[0] - goal[0];
            let dy = s[1] - goal[1];
            if (dx * dx + dy * dy).sqrt() <= REWARD_RADIUS {
                reward.trigger(reward_r);
                agent.on_reward(trial.cue, &cue_vec);
                rewarded = true;
                latency = t;
            }
        }
        rate = reward.step(DT_S);

        // Zone accounting.
        for (zi, &(_, site)) in goal_set.iter().enumerate() {
            let c = arena.reward_sites[site];
            let dx = s[0] - c[0];
            let dy = s[1] - c[1];
            if (dx * dx + dy * dy).sqrt() <= GOAL_ZONE_RADIUS {
                zone_times[zi] += DT_S;
            }
        }
        {
            let dx = s[0] - goal[0];
            let dy = s[1] - goal[1];
            if (dx * dx + dy * dy).sqrt() <= GOAL_ZONE_RADIUS {
                time_at_goal += DT_S;
            }
        }

        if record.trajectory {
            trajectory.push(TrajPoint { t, x: s[0], y: s[1], cue: trial.cue, reward_rate: rate });
        }
        if record.gate_trace {
            gate_trace.push(GateSample {
                t,
                p_update: agent.diag.p_update,
                chi: agent.diag.chi as u8,
                delta_da: agent.diag.delta_da,
                cue_on: any_cue_on as u8,
            });
        }

        if crate::environment::trial_terminated(&reward, t, trial.t_max_s, trial.probe) {
            break;
        }
    }
    agent.on_trial_end(trial.cue, rewarded, trial.probe);

    TrialOutcome {
        latency_s: latency,
        rewarded,
        steps,
        zone_times,
        time_at_goal,
        path_length,
        mean_abs_delta_coord: delta_coord_sum / steps as f64,
        trajectory,
        gate_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::schedule::CueTiming;
    use crate::environment::Wall;

    fn quick_trial(probe: bool) -> TrialPlan {
        TrialPlan {
            cue: 1,
            goal_site: 24, // center
            start: Wall::South,
            probe,
            t_max_s: 4.0,
            cue_timing: CueTiming::whole_trial(),
            distractors: vec![],
        }
    }

    #[test]
    fn every_agent_kind_builds_and_runs() {
        let arena = Arena::open();
        let field = PlaceCellField::standard();
        for kind in AgentKind::ALL {
            let mut params = AgentParams::new(kind, 7);
            params.reservoir_n = 64;
            let mut agent = Agent::build(params);
            let out = run_trial(
                &mut agent,
                &arena,
                &field,
                &quick_trial(false),
                5.0,
                &[(1, 24)],
                RecordOpts::default(),
            );
            assert!(out.steps >= 100, "agent {} ran {} steps", kind.label(), out.steps);
            // Nothing exploded.
            if let Some(res) = &agent.reservoir {
                assert!(res.x.iter().all(|x| x.is_finite()));
            }
            assert!(agent.actor.q.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn seeded_agents_are_bit_identical() {
        let arena = Arena::open();
        let field = PlaceCellField::standard();
        let run = || {
            let mut params = AgentParams::new(AgentKind::ActorCritic, 11);
            params.reservoir_n = 64;
            let mut agent = Agent::build(params);
            let out = run_trial(
                &mut agent,
                &arena,
                &field,
                &quick_trial(false),
                5.0,
                &[],
                RecordOpts { trajectory: true, gate_trace: false },
            );
            out.trajectory.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn actor_critic_ignores_schema_subsystems() {
        // Bolting disabled schema machinery onto a pure actor-critic must
        // not shift a single RNG draw or weight: trajectories stay
        // bit-identical.
        let arena = Arena::open();
        let field = PlaceCellField::standard();
        let build = |attach: bool| {
            let mut params = AgentParams::new(AgentKind::ActorCritic, 13);
            params.reservoir_n = 64;
            let mut agent = Agent::build(params);
            if attach {
                agent.coord = Some(CoordinateMap::new(N_PLACE_CELLS));
                agent.params.plasticity.coord = false;
                // No navigator: beta stays 0, so the actor never reads it.
            }
            agent
        };
        let mut plain = build(false);
        let mut attached = build(true);
        let a = run_trial(
            &mut plain,
            &arena,
            &field,
            &quick_trial(false),
            5.0,
            &[],
            RecordOpts { trajectory: true, gate_trace: false },
        );
        let b = run_trial(
            &mut attached,
            &arena,
            &field,
            &quick_trial(false),
            5.0,
            &[],
            RecordOpts { trajectory: true, gate_trace: false },
        );
        let xs_a: Vec<(f64, f64)> = a.trajectory.iter().map(|p| (p.x, p.y)).collect();
        let xs_b: Vec<(f64, f64)> = b.trajectory.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xs_a, xs_b);
    }

    #[test]
    fn probe_trials_freeze_weights_and_memory() {
        let arena = Arena::open();
        let field = PlaceCellField::standard();
        let mut params = AgentParams::new(AgentKind::HybridNeural, 17);
        params.reservoir_n = 64;
        let mut agent = Agent::build(params);
        // Give the memory something to lose.
        run_trial(
            &mut agent,
            &arena,
            &field,
            &quick_trial(false),
            5.0,
            &[(1, 24)],
            RecordOpts::default(),
        );
        let w_goal = agent.goal.as_ref().unwrap().w_goal.clone();
        let w_actor = agent.actor.w_actor.clone();
        let mut probe = quick_trial(true);
        probe.t_max_s = 10.0;
        run_trial(&mut agent, &arena, &field, &probe, 0.0, &[(1, 24)], RecordOpts::default());
        assert_eq!(agent.goal.as_ref().unwrap().w_goal, w_goal);
        assert_eq!(agent.actor.w_actor, w_actor);
    }

    #[test]
    fn symbolic_agent_stores_on_reward_and_deletes_when_stale() {
        let arena = Arena::open();
        let field = PlaceCellField::standard();
        let mut params = AgentParams::new(AgentKind::SymbolicSchema, 23);
        params.reservoir_n = 8;
        let mut agent = Agent::build(params);
        let mut cue = vec![0.0; N_CUES];
        cue_vector(2, &mut cue);
        agent.on_reward(2, &cue);
        assert_eq!(agent.kv.as_ref().unwrap().stored_count(), 1);
        // Unrewarded trial end: the association is wiped.
        agent.rewarded_this_trial = false;
        agent.on_trial_end(2, false, false);
        assert_eq!(agent.kv.as_ref().unwrap().stored_count(), 0);
    }
}
