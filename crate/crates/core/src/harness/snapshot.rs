//! Weight snapshots: flat row-major dumps of every plastic matrix with a
//! small header (shape, seed, step count), used by the weight-change
//! analysis and for resuming or probing saved runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::agents::Agent;
use crate::error::ConfigError;

/// All plastic weights of one agent at one moment, keyed by subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSnapshot {
    pub seed: u64,
    pub step_count: u64,
    /// subsystem -> (rows, cols, row-major data)
    pub matrices: BTreeMap<String, (usize, usize, Vec<f64>)>,
}

impl WeightSnapshot {
    /// Capture every plastic subsystem the agent actually has.
    pub fn capture(agent: &Agent) -> Self {
        let mut matrices = BTreeMap::new();
        matrices.insert(
            "actor".to_string(),
            (agent.actor.w_actor.rows, agent.actor.w_actor.cols, agent.actor.w_actor.data.clone()),
        );
        if let Some(critic) = &agent.critic {
            matrices.insert(
                "critic".to_string(),
                (1, critic.w_critic.len(), critic.w_critic.clone()),
            );
        }
        if let Some(coord) = &agent.coord {
            matrices.insert(
                "coord".to_string(),
                (coord.w_coord.rows, coord.w_coord.cols, coord.w_coord.data.clone()),
            );
        }
        if let Some(goal) = &agent.goal {
            matrices.insert(
                "goal".to_string(),
                (goal.w_goal.rows, goal.w_goal.cols, goal.w_goal.data.clone()),
            );
        }
        if let Some(kv) = &agent.kv {
            matrices.insert(
                "goal".to_string(),
                (kv.values.rows, kv.values.cols, kv.values.data.clone()),
            );
        }
        if let Some(gate) = &agent.gate {
            matrices.insert(
                "gate".to_string(),
                (gate.w_gate.rows, gate.w_gate.cols, gate.w_gate.data.clone()),
            );
        }
        Self { seed: agent.params.seed, step_count: agent.steps_taken, matrices }
    }

    /// Mean squared change per subsystem against an earlier snapshot.
    pub fn change_from(&self, before: &WeightSnapshot) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (name, (r, c, data)) in &self.matrices {
            if let Some((rb, cb, before_data)) = before.matrices.get(name) {
                assert_eq!((r, c), (rb, cb), "snapshot shape mismatch for {name}");
                out.push((name.clone(), super::metrics::weight_change(before_data, data)));
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        let mut text = String::new();
        writeln!(text, "weights,v1,seed={},steps={}", self.seed, self.step_count).unwrap();
        for (name, (rows, cols, data)) in &self.matrices {
            writeln!(text, "matrix,{name},{rows},{cols}").unwrap();
            for row in 0..*rows {
                let line: Vec<String> =
                    data[row * cols..(row + 1) * cols].iter().map(|v| format!("{v:.17e}")).collect();
                writeln!(text, "{}", line.join(",")).unwrap();
            }
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| ConfigError::Parse("empty snapshot".into()))?;
        let mut seed = 0;
        let mut steps = 0;
        for tok in header.split(',') {
            if let Some(v) = tok.strip_prefix("seed=") {
                seed = v.parse().map_err(|_| ConfigError::Parse("seed".into()))?;
            }
            if let Some(v) = tok.strip_prefix("steps=") {
                steps = v.parse().map_err(|_| ConfigError::Parse("steps".into()))?;
            }
        }
        let mut matrices = BTreeMap::new();
        while let Some(line) = lines.next() {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 || parts[0] != "matrix" {
                return Err(ConfigError::Parse(format!("expected matrix line: {line}")));
            }
            let name = parts[1].to_string();
            let rows: usize = parts[2].parse().map_err(|_| ConfigError::Parse("rows".into()))?;
            let cols: usize = parts[3].parse().map_err(|_| ConfigError::Parse("cols".into()))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line =
                    lines.next().ok_or_else(|| ConfigError::Parse("truncated matrix".into()))?;
                for tok in line.split(',') {
                    data.push(tok.parse().map_err(|_| ConfigError::Parse("value".into()))?);
                }
            }
            if data.len() != rows * cols {
                return Err(ConfigError::Parse(format!("matrix {name} has wrong size")));
            }
            matrices.insert(name, (rows, cols, data));
        }
        Ok(Self { seed, step_count: steps, matrices })
    }

    /// Restore the captured weights into an agent of matching shape.
    pub fn restore_into(&self, agent: &mut Agent) -> Result<(), ConfigError> {
        for (name, (rows, cols, data)) in &self.matrices {
            match name.as_str() {
                "actor" => copy_into(&mut agent.actor.w_actor.data, data, name)?,
                "critic" => {
                    let critic = agent
                        .critic
                        .as_mut()
                        .ok_or_else(|| ConfigError::Invalid("agent has no critic".into()))?;
                    copy_into(&mut critic.w_critic, data, name)?;
                }
                "coord" => {
                    let coord = agent
                        .coord
                        .as_mut()
                        .ok_or_else(|| ConfigError::Invalid("agent has no coord map".into()))?;
                    copy_into(&mut coord.w_coord.data, data, name)?;
                }
                "goal" => {
                    if let Some(goal) = agent.goal.as_mut() {
                        copy_into(&mut goal.w_goal.data, data, name)?;
                    } else if let Some(kv) = agent.kv.as_mut() {
                        if kv.values.rows != *rows || kv.values.cols != *cols {
                            return Err(ConfigError::Dimension("kv values".into()));
                        }
                        kv.values.data.copy_from_slice(data);
                    } else {
                        return Err(ConfigError::Invalid("agent has no goal memory".into()));
                    }
                }
                "gate" => {
                    let gate = agent
                        .gate
                        .as_mut()
                        .ok_or_else(|| ConfigError::Invalid("agent has no gate".into()))?;
                    copy_into(&mut gate.w_gate.data, data, name)?;
                }
                other => {
                    return Err(ConfigError::Invalid(format!("unknown subsystem {other}")))
                }
            }
        }
        Ok(())
    }
}

fn copy_into(dst: &mut [f64], src: &[f64], name: &str) -> Result<(), ConfigError> {
    if dst.len() != src.len() {
        return Err(ConfigError::Dimension(format!(
            "{name}: snapshot has {} values, agent expects {}",
            src.len(),
            dst.len()
        )));
    }
    dst.copy_from_slice(src);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentKind, AgentParams};

    #[test]
    fn capture_save_load_round_trip() {
        let mut params = AgentParams::new(AgentKind::HybridNeural, 5);
        params.reservoir_n = 32;
        let mut agent = Agent::build(params);
        agent.actor.w_actor.set(3, 7, 0.25);
        agent.goal.as_mut().unwrap().w_goal.set(1, 2, -0.5);
        let snap = WeightSnapshot::capture(&agent);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        snap.save(&path).unwrap();
        let loaded = WeightSnapshot::load(&path).unwrap();
        assert_eq!(loaded, snap);

        // Restore into a fresh agent and compare a touched entry.
        let mut params2 = AgentParams::new(AgentKind::HybridNeural, 5);
        params2.reservoir_n = 32;
        let mut fresh = Agent::build(params2);
        loaded.restore_into(&mut fresh).unwrap();
        assert_eq!(fresh.actor.w_actor.get(3, 7), 0.25);
        assert_eq!(fresh.goal.as_ref().unwrap().w_goal.get(1, 2), -0.5);
    }

    #[test]
    fn change_from_identical_is_zero() {
        let mut params = AgentParams::new(AgentKind::SymbolicSchema, 5);
        params.reservoir_n = 8;
        let agent = Agent::build(params);
        let a = WeightSnapshot::capture(&agent);
        let b = WeightSnapshot::capture(&agent);
        for (_, change) in b.change_from(&a) {
            assert_eq!(change, 0.0);
        }
    }

    #[test]
    fn restore_rejects_shape_mismatch() {
        let mut params = AgentParams::new(AgentKind::ActorCritic, 5);
        params.reservoir_n = 16;
        let agent = Agent::build(params);
        let snap = WeightSnapshot::capture(&agent);
        let mut params2 = AgentParams::new(AgentKind::ActorCritic, 5);
        params2.reservoir_n = 32;
        let mut other = Agent::build(params2);
        assert!(snap.restore_into(&mut other).is_err());
    }
}
