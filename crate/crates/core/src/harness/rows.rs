//! Output tables. Every row carries the (experiment, agent, seed, phase,
//! session, trial) keys so the metric files join losslessly, and all
//! serialization is fixed-format so identical runs produce identical bytes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// One training or probe trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub experiment: String,
    pub agent: String,
    pub seed: u64,
    /// "train" for the main stage, else the condition label.
    pub phase: String,
    pub session: usize,
    pub trial: usize,
    pub cue: u8,
    pub probe: bool,
    pub latency_s: f64,
    pub rewarded: bool,
    pub time_at_goal_s: f64,
    pub path_length_m: f64,
}

/// One probe trial's zone accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub experiment: String,
    pub agent: String,
    pub seed: u64,
    pub phase: String,
    pub session: usize,
    pub cue: u8,
    pub time_correct_s: f64,
    pub time_any_s: f64,
    /// None when the agent never entered any goal zone.
    pub visit_ratio: Option<f64>,
}

/// Gate behaviour summarized over one probe session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateProbeRow {
    pub experiment: String,
    pub agent: String,
    pub seed: u64,
    pub phase: String,
    pub session: usize,
    pub p_update_cue_window: f64,
    pub p_update_post_cue: f64,
}

/// Per-subsystem weight change across a condition session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightChangeRow {
    pub experiment: String,
    pub agent: String,
    pub seed: u64,
    pub condition: String,
    pub subsystem: String,
    pub mean_sq_change: f64,
}

/// Full output of one experiment.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExperimentTables {
    pub trials: Vec<TrialRow>,
    pub probes: Vec<ProbeRow>,
    pub gate_probes: Vec<GateProbeRow>,
    pub weight_changes: Vec<WeightChangeRow>,
}

impl ExperimentTables {
    pub fn merge(&mut self, other: ExperimentTables) {
        self.trials.extend(other.trials);
        self.probes.extend(other.probes);
        self.gate_probes.extend(other.gate_probes);
        self.weight_changes.extend(other.weight_changes);
    }

    /// Canonical ordering so that parallel and serial runs serialize the
    /// same bytes.
    pub fn sort(&mut self) {
        self.trials.sort_by(|a, b| {
            (&a.agent, a.seed, &a.phase, a.session, a.trial).cmp(&(
                &b.agent, b.seed, &b.phase, b.session, b.trial,
            ))
        });
        self.probes.sort_by(|a, b| {
            (&a.agent, a.seed, &a.phase, a.session, a.cue).cmp(&(
                &b.agent, b.seed, &b.phase, b.session, b.cue,
            ))
        });
        self.gate_probes.sort_by(|a, b| {
            (&a.agent, a.seed, &a.phase, a.session).cmp(&(&b.agent, b.seed, &b.phase, b.session))
        });
        self.weight_changes.sort_by(|a, b| {
            (&a.agent, a.seed, &a.condition, &a.subsystem).cmp(&(
                &b.agent, b.seed, &b.condition, &b.subsystem,
            ))
        });
    }

    pub fn write_csv_files(&self, dir: &Path) -> Result<(), ConfigError> {
        std::fs::create_dir_all(dir)?;
        write_csv(&dir.join("trials.csv"), TRIAL_HEADER, &self.trials, trial_line)?;
        write_csv(&dir.join("probes.csv"), PROBE_HEADER, &self.probes, probe_line)?;
        write_csv(&dir.join("gate_probes.csv"), GATE_HEADER, &self.gate_probes, gate_line)?;
        write_csv(
            &dir.join("weight_changes.csv"),
            WEIGHT_HEADER,
            &self.weight_changes,
            weight_line,
        )?;
        Ok(())
    }

    pub fn read_csv_files(dir: &Path) -> Result<Self, ConfigError> {
        Ok(Self {
            trials: read_csv(&dir.join("trials.csv"), parse_trial)?,
            probes: read_csv(&dir.join("probes.csv"), parse_probe)?,
            gate_probes: read_csv(&dir.join("gate_probes.csv"), parse_gate)?,
            weight_changes: read_csv(&dir.join("weight_changes.csv"), parse_weight)?,
        })
    }
}

const TRIAL_HEADER: &str = "experiment,agent,seed,phase,session,trial,cue,probe,latency_s,rewarded,time_at_goal_s,path_length_m";
const PROBE_HEADER: &str =
    "experiment,agent,seed,phase,session,cue,time_correct_s,time_any_s,visit_ratio";
const GATE_HEADER: &str =
    "experiment,agent,seed,phase,session,p_update_cue_window,p_update_post_cue";
const WEIGHT_HEADER: &str = "experiment,agent,seed,condition,subsystem,mean_sq_change";

fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

fn trial_line(r: &TrialRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.experiment,
        r.agent,
        r.seed,
        r.phase,
        r.session,
        r.trial,
        r.cue,
        r.probe,
        fmt_f(r.latency_s),
        r.rewarded,
        fmt_f(r.time_at_goal_s),
        fmt_f(r.path_length_m)
    )
}

fn probe_line(r: &ProbeRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.experiment,
        r.agent,
        r.seed,
        r.phase,
        r.session,
        r.cue,
        fmt_f(r.time_correct_s),
        fmt_f(r.time_any_s),
        r.visit_ratio.map(fmt_f).unwrap_or_default()
    )
}

fn gate_line(r: &GateProbeRow) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.experiment,
        r.agent,
        r.seed,
        r.phase,
        r.session,
        fmt_f(r.p_update_cue_window),
        fmt_f(r.p_update_post_cue)
    )
}

fn weight_line(r: &WeightChangeRow) -> String {
    format!(
        "{},{},{},{},{},{:.10e}",
        r.experiment, r.agent, r.seed, r.condition, r.subsystem, r.mean_sq_change
    )
}

fn write_csv<T>(
    path: &Path,
    header: &str,
    rows: &[T],
    line: impl Fn(&T) -> String,
) -> Result<(), ConfigError> {
    let mut out = String::with_capacity(rows.len() * 64 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn read_csv<T>(
    path: &Path,
    parse: impl Fn(&[&str]) -> Option<T>,
) -> Result<Vec<T>, ConfigError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match parse(&fields) {
            Some(r) => rows.push(r),
            None => {
                return Err(ConfigError::Parse(format!(
                    "{}:{} bad row: {line}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn parse_trial(f: &[&str]) -> Option<TrialRow> {
    if f.len() != 12 {
        return None;
    }
    Some(TrialRow {
        experiment: f[0].into(),
        agent: f[1].into(),
        seed: f[2].parse().ok()?,
        phase: f[3].into(),
        session: f[4].parse().ok()?,
        trial: f[5].parse().ok()?,
        cue: f[6].parse().ok()?,
        probe: f[7].parse().ok()?,
        latency_s: f[8].parse().ok()?,
        rewarded: f[9].parse().ok()?,
        time_at_goal_s: f[10].parse().ok()?,
        path_length_m: f[11].parse().ok()?,
    })
}

fn parse_probe(f: &[&str]) -> Option<ProbeRow> {
    if f.len() != 9 {
        return None;
    }
    Some(ProbeRow {
        experiment: f[0].into(),
        agent: f[1].into(),
        seed: f[2].parse().ok()?,
        phase: f[3].into(),
        session: f[4].parse().ok()?,
        cue: f[5].parse().ok()?,
        time_correct_s: f[6].parse().ok()?,
        time_any_s: f[7].parse().ok()?,
        visit_ratio: if f[8].is_empty() { None } else { Some(f[8].parse().ok()?) },
    })
}

fn parse_gate(f: &[&str]) -> Option<GateProbeRow> {
    if f.len() != 7 {
        return None;
    }
    Some(GateProbeRow {
        experiment: f[0].into(),
        agent: f[1].into(),
        seed: f[2].parse().ok()?,
        phase: f[3].into(),
        session: f[4].parse().ok()?,
        p_update_cue_window: f[5].parse().ok()?,
        p_update_post_cue: f[6].parse().ok()?,
    })
}

fn parse_weight(f: &[&str]) -> Option<WeightChangeRow> {
    if f.len() != 6 {
        return None;
    }
    Some(WeightChangeRow {
        experiment: f[0].into(),
        agent: f[1].into(),
        seed: f[2].parse().ok()?,
        condition: f[3].into(),
        subsystem: f[4].into(),
        mean_sq_change: f[5].parse().ok()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_tables() -> ExperimentTables {
        ExperimentTables {
            trials: vec![TrialRow {
                experiment: "e".into(),
                agent: "symbolic".into(),
                seed: 1,
                phase: "train".into(),
                session: 2,
                trial: 3,
                cue: 1,
                probe: false,
                latency_s: 12.34,
                rewarded: true,
                time_at_goal_s: 1.0,
                path_length_m: 4.2,
            }],
            probes: vec![ProbeRow {
                experiment: "e".into(),
                agent: "symbolic".into(),
                seed: 1,
                phase: "2npa".into(),
                session: 1,
                cue: 7,
                time_correct_s: 30.0,
                time_any_s: 40.0,
                visit_ratio: Some(0.75),
            }],
            gate_probes: vec![],
            weight_changes: vec![WeightChangeRow {
                experiment: "e".into(),
                agent: "neural".into(),
                seed: 1,
                condition: "6npa".into(),
                subsystem: "goal".into(),
                mean_sq_change: 1.25e-7,
            }],
        }
    }

    #[test]
    fn csv_round_trip_and_stability() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = sample_tables();
        t.sort();
        t.write_csv_files(dir.path()).unwrap();
        let loaded = ExperimentTables::read_csv_files(dir.path()).unwrap();
        assert_eq!(loaded.trials, t.trials);
        assert_eq!(loaded.probes, t.probes);
        assert_eq!(loaded.weight_changes, t.weight_changes);

        // Re-writing serializes byte-identically.
        let bytes1 = std::fs::read(dir.path().join("trials.csv")).unwrap();
        t.write_csv_files(dir.path()).unwrap();
        let bytes2 = std::fs::read(dir.path().join("trials.csv")).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn sort_is_order_independent() {
        let mut a = sample_tables();
        let mut extra = sample_tables();
        extra.trials[0].seed = 0;
        let mut merged1 = ExperimentTables::default();
        merged1.merge(a.clone());
        merged1.merge(extra.clone());
        merged1.sort();
        let mut merged2 = ExperimentTables::default();
        merged2.merge(extra.clone());
        merged2.merge(a.clone());
        merged2.sort();
        assert_eq!(merged1.trials, merged2.trials);
        a.sort();
    }

    #[test]
    fn missing_visit_ratio_round_trips_as_blank() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = sample_tables();
        t.probes[0].visit_ratio = None;
        t.write_csv_files(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("probes.csv")).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
        let loaded = ExperimentTables::read_csv_files(dir.path()).unwrap();
        assert_eq!(loaded.probes[0].visit_ratio, None);
    }
}
