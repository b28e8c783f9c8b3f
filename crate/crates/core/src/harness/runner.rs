//! Experiment execution: per-seed protocols for every task family, a
//! bounded worker pool over (agent, seed) jobs, shard-level resumability,
//! and deterministic merged outputs.

use std::path::Path;
use std::sync::Mutex;

use rand_chacha::ChaCha12Rng;

use crate::agents::{run_trial, Agent, RecordOpts, TrialOutcome};
use crate::environment::schedule::{
    build_mpa_custom, build_schedule, MpaCondition, MpaMaps, SessionPlan, TaskKind, TaskSchedule,
};
use crate::environment::{Arena, PlaceCellField};
use crate::error::ConfigError;
use crate::harness::config::{AgentSetup, ExperimentSpec};
use crate::harness::rows::{
    ExperimentTables, GateProbeRow, ProbeRow, TrialRow, WeightChangeRow,
};
use crate::harness::snapshot::WeightSnapshot;
use crate::rng::{stream, stream_rng};

/// Run every (agent, seed) job, merge, and (when an output directory is
/// set) persist CSVs, the resolved config, and per-seed shards that make
/// re-runs resumable.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentTables, ConfigError> {
    if spec.agents.is_empty() {
        return Err(ConfigError::Invalid("experiment has no agents".into()));
    }
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir.join("shards"))?;
        std::fs::write(
            dir.join("resolved_config.json"),
            serde_json::to_string_pretty(&spec.resolved_json()).unwrap(),
        )?;
    }

    let jobs: Vec<(usize, u64)> = spec
        .agents
        .iter()
        .enumerate()
        .flat_map(|(ai, _)| spec.seeds.iter().map(move |&s| (ai, s)))
        .collect();

    let results: Mutex<Vec<Option<ExperimentTables>>> = Mutex::new(vec![None; jobs.len()]);
    let next_job = Mutex::new(0usize);
    let n_workers = spec.threads.min(jobs.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let job_idx = {
                    let mut guard = next_job.lock().unwrap();
                    if *guard >= jobs.len() {
                        return;
                    }
                    let idx = *guard;
                    *guard += 1;
                    idx
                };
                let (agent_idx, seed) = jobs[job_idx];
                let setup = &spec.agents[agent_idx];
                let tables = run_or_load_shard(spec, setup, seed);
                results.lock().unwrap()[job_idx] = Some(tables);
            });
        }
    });

    let mut merged = ExperimentTables::default();
    for tables in results.into_inner().unwrap() {
        merged.merge(tables.expect("worker finished every job"));
    }
    merged.sort();

    if let Some(dir) = &spec.out_dir {
        merged.write_csv_files(dir)?;
        write_summary(spec, &merged, dir)?;
    }
    Ok(merged)
}

fn shard_path(dir: &Path, setup: &AgentSetup, seed: u64) -> std::path::PathBuf {
    dir.join("shards").join(format!("{}__{seed}.json", setup.display_label()))
}

fn run_or_load_shard(spec: &ExperimentSpec, setup: &AgentSetup, seed: u64) -> ExperimentTables {
    if let Some(dir) = &spec.out_dir {
        let path = shard_path(dir, setup, seed);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(tables) = serde_json::from_str::<ExperimentTables>(&text) {
                return tables;
            }
        }
        let tables = run_seed(spec, setup, seed);
        if let Ok(json) = serde_json::to_string(&tables) {
            let _ = std::fs::write(&path, json);
        }
        tables
    } else {
        run_seed(spec, setup, seed)
    }
}

/// One (agent, seed) simulation, start to finish.
pub fn run_seed(spec: &ExperimentSpec, setup: &AgentSetup, seed: u64) -> ExperimentTables {
    match spec.task {
        TaskKind::Dmp | TaskKind::SingleGoalObstacle => run_plain_seed(spec, setup, seed),
        TaskKind::Mpa | TaskKind::MpaObstacle | TaskKind::MpaDistractor => {
            run_mpa_seed(spec, setup, seed)
        }
    }
}

struct SeedCtx<'a> {
    spec: &'a ExperimentSpec,
    label: String,
    seed: u64,
    arena: Arena,
    reward_r: f64,
    tables: ExperimentTables,
}

impl<'a> SeedCtx<'a> {
    fn new(spec: &'a ExperimentSpec, setup: &AgentSetup, seed: u64) -> Self {
        let arena = match spec.task {
            TaskKind::SingleGoalObstacle => Arena::single_goal_obstacle(),
            TaskKind::MpaObstacle => Arena::mpa_obstacle(),
            _ => Arena::open(),
        };
        Self {
            spec,
            label: setup.display_label(),
            seed,
            arena,
            reward_r: spec.reward_r(),
            tables: ExperimentTables::default(),
        }
    }

    fn trial_row(
        &mut self,
        phase: &str,
        session: usize,
        trial_idx: usize,
        cue: u8,
        probe: bool,
        outcome: &TrialOutcome,
    ) {
        self.tables.trials.push(TrialRow {
            experiment: self.spec.name.clone(),
            agent: self.label.clone(),
            seed: self.seed,
            phase: phase.to_string(),
            session,
            trial: trial_idx,
            cue,
            probe,
            latency_s: outcome.latency_s,
            rewarded: outcome.rewarded,
            time_at_goal_s: outcome.time_at_goal,
            path_length_m: outcome.path_length,
        });
    }

    fn probe_row(
        &mut self,
        phase: &str,
        session: usize,
        cue: u8,
        outcome: &TrialOutcome,
        pair_index: usize,
    ) {
        let time_any: f64 = outcome.zone_times.iter().sum();
        let time_correct = outcome.zone_times.get(pair_index).copied().unwrap_or(0.0);
        self.tables.probes.push(ProbeRow {
            experiment: self.spec.name.clone(),
            agent: self.label.clone(),
            seed: self.seed,
            phase: phase.to_string(),
            session,
            cue,
            time_correct_s: time_correct,
            time_any_s: time_any,
            visit_ratio: crate::harness::metrics::visit_ratio(time_correct, time_any),
        });
    }

    /// Run one session plan; returns the gate trace aggregates when asked.
    fn run_session(
        &mut self,
        agent: &mut Agent,
        field: &PlaceCellField,
        session: &SessionPlan,
        schedule: &TaskSchedule,
        phase: &str,
        session_no: usize,
        record_gate: bool,
    ) {
        let mut gate_cue: (f64, usize) = (0.0, 0);
        let mut gate_post: (f64, usize) = (0.0, 0);
        for (ti, trial) in session.trials.iter().enumerate() {
            let record = RecordOpts {
                trajectory: false,
                gate_trace: record_gate && trial.probe,
            };
            let reward_r = if trial.probe { 0.0 } else { self.reward_r };
            let outcome = run_trial(
                agent,
                &self.arena,
                field,
                trial,
                reward_r,
                &schedule.goal_set,
                record,
            );
            self.trial_row(phase, session_no, ti + 1, trial.cue, trial.probe, &outcome);
            if trial.probe && !schedule.goal_set.is_empty() {
                let pair_index = schedule
                    .goal_set
                    .iter()
                    .position(|&(c, _)| c == trial.cue)
                    .unwrap_or(0);
                self.probe_row(phase, session_no, trial.cue, &outcome, pair_index);
            }
            if record.gate_trace {
                for s in &outcome.gate_trace {
                    if s.t >= trial.cue_timing.onset_s && s.t < trial.cue_timing.offset_s {
                        gate_cue.0 += s.p_update;
                        gate_cue.1 += 1;
                    } else if s.t >= trial.cue_timing.offset_s + 1.0 {
                        gate_post.0 += s.p_update;
                        gate_post.1 += 1;
                    }
                }
            }
        }
        if record_gate && session.probe_session && gate_cue.1 > 0 && gate_post.1 > 0 {
            self.tables.gate_probes.push(GateProbeRow {
                experiment: self.spec.name.clone(),
                agent: self.label.clone(),
                seed: self.seed,
                phase: phase.to_string(),
                session: session_no,
                p_update_cue_window: gate_cue.0 / gate_cue.1 as f64,
                p_update_post_cue: gate_post.0 / gate_post.1 as f64,
            });
        }
    }

    /// Run a whole schedule. Training sessions are numbered 1.. and probe
    /// sessions take the number of the training session they follow.
    fn run_schedule(
        &mut self,
        agent: &mut Agent,
        field: &PlaceCellField,
        schedule: &TaskSchedule,
        phase: &str,
        record_gate: bool,
    ) {
        let mut train_no = 0usize;
        for session in &schedule.sessions {
            if !session.probe_session {
                train_no += 1;
            }
            self.run_session(agent, field, session, schedule, phase, train_no, record_gate);
        }
    }
}

fn run_plain_seed(spec: &ExperimentSpec, setup: &AgentSetup, seed: u64) -> ExperimentTables {
    let mut ctx = SeedCtx::new(spec, setup, seed);
    let field = PlaceCellField::standard();
    let mut sched_rng = stream_rng(seed, stream::SCHEDULE);
    let maps = MpaMaps::generate(&ctx.arena, &mut sched_rng);
    let params = spec.schedule_params();
    let schedule = build_schedule(
        spec.task,
        MpaCondition::Opa,
        &params,
        &ctx.arena,
        &maps,
        &mut sched_rng,
    )
    .expect("plain schedule");
    let mut agent = Agent::build(spec.agent_params(setup, seed));
    ctx.run_schedule(&mut agent, &field, &schedule, "train", false);
    save_snapshot_file(spec, setup, seed, &agent);
    ctx.tables
}

/// Optionally persist the post-training weights for later probing.
fn save_snapshot_file(spec: &ExperimentSpec, setup: &AgentSetup, seed: u64, agent: &Agent) {
    if !spec.overrides.save_snapshots.unwrap_or(false) {
        return;
    }
    if let Some(dir) = &spec.out_dir {
        let snap_dir = dir.join("snapshots");
        let _ = std::fs::create_dir_all(&snap_dir);
        let path = snap_dir.join(format!("{}__{seed}__train.csv", setup.display_label()));
        let _ = WeightSnapshot::capture(agent).save(&path);
    }
}

fn branch_rng(seed: u64, branch: usize) -> ChaCha12Rng {
    stream_rng(seed, 1000 + branch as u64)
}

fn run_mpa_seed(spec: &ExperimentSpec, setup: &AgentSetup, seed: u64) -> ExperimentTables {
    let mut ctx = SeedCtx::new(spec, setup, seed);
    let field = PlaceCellField::standard();
    let mut sched_rng = stream_rng(seed, stream::SCHEDULE);
    let maps = MpaMaps::generate(&ctx.arena, &mut sched_rng);
    let params = spec.schedule_params();
    let record_gate = spec.task == TaskKind::MpaDistractor;

    let schedule =
        build_schedule(spec.task, MpaCondition::Opa, &params, &ctx.arena, &maps, &mut sched_rng)
            .expect("training schedule");
    let mut agent = Agent::build(spec.agent_params(setup, seed));
    ctx.run_schedule(&mut agent, &field, &schedule, "train", record_gate);
    save_snapshot_file(spec, setup, seed, &agent);

    let snapshot_weights = spec.overrides.snapshot_weights.unwrap_or(false);
    let trained_snapshot = snapshot_weights.then(|| WeightSnapshot::capture(&agent));
    let trained_agent = agent;

    for (bi, condition) in spec.conditions().iter().enumerate() {
        let mut branch_agent = trained_agent.clone();
        let mut rng = branch_rng(seed, bi);
        let branch_field = if matches!(condition, MpaCondition::Nm | MpaCondition::Npa6Nm) {
            field.shuffled(&mut rng)
        } else {
            field.clone()
        };
        let branch_schedule =
            build_schedule(spec.task, *condition, &params, &ctx.arena, &maps, &mut rng)
                .expect("branch schedule");
        ctx.run_schedule(
            &mut branch_agent,
            &branch_field,
            &branch_schedule,
            condition.label(),
            record_gate,
        );

        if let Some(before) = &trained_snapshot {
            let after = WeightSnapshot::capture(&branch_agent);
            for (subsystem, change) in after.change_from(before) {
                ctx.tables.weight_changes.push(WeightChangeRow {
                    experiment: spec.name.clone(),
                    agent: ctx.label.clone(),
                    seed,
                    condition: condition.label().to_string(),
                    subsystem,
                    mean_sq_change: change,
                });
            }
        }

        // Extended new-maze training followed by new pairs in the new maze.
        if *condition == MpaCondition::Nm {
            if let Some(extra) = spec.overrides.nm_extension_sessions {
                if extra > 0 {
                    let ext = build_mpa_custom(
                        spec.task,
                        MpaCondition::Nm,
                        extra,
                        &[],
                        &params,
                        &maps,
                        &mut rng,
                    );
                    ctx.run_schedule(&mut branch_agent, &branch_field, &ext, "nm_ext", false);
                    let npa6nm = build_schedule(
                        spec.task,
                        MpaCondition::Npa6Nm,
                        &params,
                        &ctx.arena,
                        &maps,
                        &mut rng,
                    )
                    .expect("6npanm schedule");
                    ctx.run_schedule(
                        &mut branch_agent,
                        &branch_field,
                        &npa6nm,
                        MpaCondition::Npa6Nm.label(),
                        record_gate,
                    );
                }
            }
        }
    }
    ctx.tables
}

fn write_summary(
    spec: &ExperimentSpec,
    tables: &ExperimentTables,
    dir: &Path,
) -> Result<(), ConfigError> {
    use std::collections::BTreeMap;
    let mut by_agent: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for t in tables.trials.iter().filter(|t| !t.probe && t.phase == "train") {
        let e = by_agent.entry(t.agent.as_str()).or_insert((0.0, 0));
        e.0 += t.latency_s;
        e.1 += 1;
    }
    let latency: BTreeMap<String, f64> = by_agent
        .into_iter()
        .map(|(k, (sum, n))| (k.to_string(), sum / n.max(1) as f64))
        .collect();

    let mut ratios: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for p in &tables.probes {
        if let Some(r) = p.visit_ratio {
            let e = ratios.entry(format!("{}/{}", p.agent, p.phase)).or_insert((0.0, 0));
            e.0 += r;
            e.1 += 1;
        }
    }
    let ratio_means: BTreeMap<String, f64> =
        ratios.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();

    let summary = serde_json::json!({
        "experiment": spec.name,
        "trials": tables.trials.len(),
        "probes": tables.probes.len(),
        "mean_training_latency_s": latency,
        "mean_visit_ratio": ratio_means,
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).unwrap())?;
    Ok(())
}
