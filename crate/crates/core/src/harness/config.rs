//! Experiment configuration: per-task hyperparameter defaults, agent
//! setups, overrides, and the TOML file format the CLI consumes. Every
//! default is overridable and the fully resolved values are logged with
//! each run.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentKind, AgentParams, PlasticityFlags};
use crate::dynamics::DT_MS;
use crate::environment::schedule::{MpaCondition, ScheduleParams, TaskKind};
use crate::error::ConfigError;
use crate::goal_memory::GoalRule;
use crate::navigator::NavNet;
use crate::reservoir::TdParams;

/// Task-tuned hyperparameters (reward size, TD time constant, learning
/// rates, acetylcholine level, hybrid mixing weight).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TaskDefaults {
    pub reward_r: f64,
    pub tau_g_ms: f64,
    pub eta_critic: f64,
    pub eta_actor: f64,
    pub omega_ach: f64,
    pub hybrid_beta: f64,
}

/// The tuned defaults for each task family.
pub fn task_defaults(task: TaskKind) -> TaskDefaults {
    match task {
        TaskKind::Dmp => TaskDefaults {
            reward_r: 5.0,
            tau_g_ms: 3000.0,
            eta_critic: 0.0002,
            eta_actor: 0.00005,
            omega_ach: 0.0005,
            hybrid_beta: 0.3,
        },
        TaskKind::SingleGoalObstacle => TaskDefaults {
            reward_r: 1.0,
            tau_g_ms: 10_000.0,
            eta_critic: 0.0001,
            eta_actor: 0.00001,
            omega_ach: 0.00005,
            hybrid_beta: 0.3,
        },
        TaskKind::Mpa => TaskDefaults {
            reward_r: 5.0,
            tau_g_ms: 3000.0,
            eta_critic: 0.0002,
            eta_actor: 0.00005,
            omega_ach: 0.00005,
            hybrid_beta: 0.3,
        },
        TaskKind::MpaObstacle => TaskDefaults {
            reward_r: 1.0,
            tau_g_ms: 10_000.0,
            eta_critic: 0.0001,
            eta_actor: 0.000005,
            omega_ach: 0.00005,
            hybrid_beta: 0.4,
        },
        TaskKind::MpaDistractor => TaskDefaults {
            reward_r: 5.0,
            tau_g_ms: 3000.0,
            eta_critic: 0.0002,
            eta_actor: 0.0001,
            omega_ach: 0.00005,
            hybrid_beta: 0.9,
        },
    }
}

/// One agent entry in an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSetup {
    pub kind: AgentKind,
    /// Optional label suffix to distinguish multiple setups of one kind.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub beta_control: Option<f64>,
    #[serde(default)]
    pub reservoir_n: Option<usize>,
    #[serde(default)]
    pub goal_rule: Option<GoalRule>,
    #[serde(default)]
    pub eta_goal: Option<f64>,
    /// Gate plasticity switch for the working-memory agent.
    #[serde(default)]
    pub gate_plasticity: Option<bool>,
    /// Use the symbolic navigator even for neural agents (no frozen net).
    #[serde(default)]
    pub symbolic_nav: bool,
}

impl AgentSetup {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            label: None,
            beta_control: None,
            reservoir_n: None,
            goal_rule: None,
            eta_goal: None,
            gate_plasticity: None,
            symbolic_nav: false,
        }
    }

    pub fn display_label(&self) -> String {
        match &self.label {
            Some(l) => format!("{}_{}", self.kind.label(), l),
            None => self.kind.label().to_string(),
        }
    }
}

/// Overridable experiment knobs; `None` means the task default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Overrides {
    pub sessions: Option<usize>,
    pub t_max_s: Option<f64>,
    pub probe_after: Option<Vec<usize>>,
    pub distractor_count: Option<usize>,
    pub reward_r: Option<f64>,
    pub tau_g_ms: Option<f64>,
    pub eta_critic: Option<f64>,
    pub eta_actor: Option<f64>,
    pub omega_ach: Option<f64>,
    pub reservoir_n: Option<usize>,
    /// Conditions to branch into after MPA training.
    pub conditions: Option<Vec<MpaCondition>>,
    /// Continue the new-maze branch for this many extra sessions, then run
    /// the 6NPANM condition.
    pub nm_extension_sessions: Option<usize>,
    /// Capture per-subsystem weight snapshots around condition branches.
    pub snapshot_weights: Option<bool>,
    /// Write end-of-training weight snapshot files under the run directory.
    pub save_snapshots: Option<bool>,
}

/// A fully described experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub task: TaskKind,
    pub agents: Vec<AgentSetup>,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
    pub out_dir: Option<PathBuf>,
    pub record_trajectories: bool,
    pub threads: usize,
    /// Frozen navigation network shared by neural agents.
    pub nav_net: Option<Arc<NavNet>>,
}

impl ExperimentSpec {
    pub fn new(name: &str, task: TaskKind) -> Self {
        Self {
            name: name.to_string(),
            task,
            agents: Vec::new(),
            seeds: (0..4).collect(),
            overrides: Overrides::default(),
            out_dir: None,
            record_trajectories: false,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            nav_net: None,
        }
    }

    /// Resolved schedule parameters for this experiment.
    pub fn schedule_params(&self) -> ScheduleParams {
        let mut params = ScheduleParams::defaults_for(self.task);
        if let Some(s) = self.overrides.sessions {
            params.sessions = s;
        }
        if let Some(t) = self.overrides.t_max_s {
            params.t_max_s = t;
        }
        if let Some(p) = &self.overrides.probe_after {
            params.probe_after = p.clone();
        }
        if let Some(d) = self.overrides.distractor_count {
            params.distractor_count = d;
        }
        params
    }

    /// Resolved reward magnitude.
    pub fn reward_r(&self) -> f64 {
        self.overrides.reward_r.unwrap_or(task_defaults(self.task).reward_r)
    }

    /// Branch conditions for the MPA family.
    pub fn conditions(&self) -> Vec<MpaCondition> {
        if let Some(c) = &self.overrides.conditions {
            return c.clone();
        }
        match self.task {
            TaskKind::Mpa => vec![
                MpaCondition::Opa,
                MpaCondition::Npa2,
                MpaCondition::Npa6,
                MpaCondition::Nm,
            ],
            TaskKind::MpaObstacle => {
                vec![MpaCondition::Opa, MpaCondition::Npa2, MpaCondition::Npa6]
            }
            TaskKind::MpaDistractor => vec![
                MpaCondition::Opa,
                MpaCondition::Npa2,
                MpaCondition::Npa6,
                MpaCondition::Nm,
            ],
            _ => vec![],
        }
    }

    /// Build the concrete agent parameters for one setup and seed.
    pub fn agent_params(&self, setup: &AgentSetup, seed: u64) -> AgentParams {
        let defaults = task_defaults(self.task);
        let kind = setup.kind;
        let beta = kind
            .fixed_beta()
            .or(setup.beta_control)
            .unwrap_or(defaults.hybrid_beta);
        let td = TdParams::new(
            self.overrides.tau_g_ms.unwrap_or(defaults.tau_g_ms),
            DT_MS,
            self.overrides.eta_critic.unwrap_or(defaults.eta_critic),
            self.overrides.eta_actor.unwrap_or(defaults.eta_actor),
        );
        let mut plasticity = PlasticityFlags::default();
        if let Some(gate) = setup.gate_plasticity {
            plasticity.gate = gate;
        }
        let nav_net = if setup.symbolic_nav { None } else { self.nav_net.clone() };
        AgentParams {
            kind,
            beta_control: beta,
            reservoir_n: setup
                .reservoir_n
                .or(self.overrides.reservoir_n)
                .unwrap_or(512),
            goal_rule: setup.goal_rule.unwrap_or(GoalRule::Eh),
            eta_goal: setup.eta_goal.unwrap_or(crate::goal_memory::ETA_GOAL),
            omega_ach: self.overrides.omega_ach.unwrap_or(defaults.omega_ach),
            td,
            plasticity,
            nav_net,
            seed,
        }
    }

    /// JSON blob of every resolved value, written next to the outputs.
    pub fn resolved_json(&self) -> serde_json::Value {
        let params = self.schedule_params();
        let defaults = task_defaults(self.task);
        serde_json::json!({
            "name": self.name,
            "task": self.task.label(),
            "seeds": self.seeds,
            "schedule": {
                "sessions": params.sessions,
                "t_max_s": params.t_max_s,
                "probe_t_max_s": params.probe_t_max_s,
                "probe_after": params.probe_after,
                "distractor_count": params.distractor_count,
            },
            "reward_r": self.reward_r(),
            "tau_g_ms": self.overrides.tau_g_ms.unwrap_or(defaults.tau_g_ms),
            "eta_critic": self.overrides.eta_critic.unwrap_or(defaults.eta_critic),
            "eta_actor": self.overrides.eta_actor.unwrap_or(defaults.eta_actor),
            "omega_ach": self.overrides.omega_ach.unwrap_or(defaults.omega_ach),
            "conditions": self.conditions().iter().map(|c| c.label()).collect::<Vec<_>>(),
            "agents": self.agents.iter().map(|a| a.display_label()).collect::<Vec<_>>(),
        })
    }
}

/// The TOML file schema for `schema-nav train --config`.
#[derive(Debug, Deserialize)]
pub struct ExperimentToml {
    pub name: String,
    pub task: TaskKind,
    #[serde(default)]
    pub seeds: Option<usize>,
    #[serde(default)]
    pub seed_start: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub record_trajectories: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub agent: Vec<AgentSetup>,
    #[serde(default)]
    pub overrides: Option<Overrides>,
}

/// Parse an experiment TOML into a spec. The navigation network is
/// attached separately by the caller.
pub fn spec_from_toml(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let parsed: ExperimentToml =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if parsed.agent.is_empty() {
        return Err(ConfigError::Invalid("config declares no [[agent]] blocks".into()));
    }
    let n_seeds = parsed.seeds.unwrap_or(4);
    let start = parsed.seed_start.unwrap_or(0);
    let mut spec = ExperimentSpec::new(&parsed.name, parsed.task);
    spec.agents = parsed.agent;
    spec.seeds = (start..start + n_seeds as u64).collect();
    spec.out_dir = parsed.out_dir.map(PathBuf::from);
    spec.record_trajectories = parsed.record_trajectories;
    if let Some(t) = parsed.threads {
        spec.threads = t.max(1);
    }
    if let Some(o) = parsed.overrides {
        spec.overrides = o;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_defaults_match_task_families() {
        let dmp = task_defaults(TaskKind::Dmp);
        assert_eq!(dmp.reward_r, 5.0);
        assert_eq!(dmp.tau_g_ms, 3000.0);
        assert_eq!(dmp.eta_critic, 0.0002);
        assert_eq!(dmp.eta_actor, 0.00005);
        assert_eq!(dmp.omega_ach, 0.0005);
        let obs = task_defaults(TaskKind::SingleGoalObstacle);
        assert_eq!(obs.reward_r, 1.0);
        assert_eq!(obs.tau_g_ms, 10_000.0);
        let mpa_obs = task_defaults(TaskKind::MpaObstacle);
        assert_eq!(mpa_obs.eta_actor, 0.000005);
        assert_eq!(mpa_obs.hybrid_beta, 0.4);
        let dis = task_defaults(TaskKind::MpaDistractor);
        assert_eq!(dis.eta_actor, 0.0001);
        assert_eq!(dis.hybrid_beta, 0.9);
    }

    #[test]
    fn overrides_apply_and_resolve() {
        let mut spec = ExperimentSpec::new("t", TaskKind::Mpa);
        spec.agents.push(AgentSetup::new(AgentKind::ActorCritic));
        spec.overrides.sessions = Some(5);
        spec.overrides.t_max_s = Some(120.0);
        spec.overrides.eta_actor = Some(1e-6);
        let params = spec.schedule_params();
        assert_eq!(params.sessions, 5);
        assert_eq!(params.t_max_s, 120.0);
        let ap = spec.agent_params(&spec.agents[0], 3);
        assert_eq!(ap.td.eta_actor, 1e-6);
        assert_eq!(ap.beta_control, 0.0, "actor-critic beta is pinned");
        let v = spec.resolved_json();
        assert_eq!(v["schedule"]["sessions"], 5);
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            name = "dmp_demo"
            task = "dmp"
            seeds = 3
            out_dir = "runs/dmp_demo"

            [[agent]]
            kind = "symbolic"

            [[agent]]
            kind = "actor_critic"
            reservoir_n = 256

            [overrides]
            t_max_s = 200.0
        "#;
        let spec = spec_from_toml(text).unwrap();
        assert_eq!(spec.name, "dmp_demo");
        assert_eq!(spec.task, TaskKind::Dmp);
        assert_eq!(spec.agents.len(), 2);
        assert_eq!(spec.seeds, vec![0, 1, 2]);
        assert_eq!(spec.agents[1].reservoir_n, Some(256));
        assert_eq!(spec.overrides.t_max_s, Some(200.0));
        assert!(spec_from_toml("name = \"x\"\ntask = \"dmp\"").is_err());
    }
}
