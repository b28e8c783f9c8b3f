//! Task schedules: session/trial plans for the DMP, obstacle, and
//! multiple-paired-association task families, plus cue-goal maps and
//! distractor timelines.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{Arena, Wall};
use crate::error::ConfigError;

/// The five task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Dmp,
    SingleGoalObstacle,
    Mpa,
    MpaObstacle,
    MpaDistractor,
}

impl TaskKind {
    pub fn label(self) -> &'static str {
        match self {
            TaskKind::Dmp => "dmp",
            TaskKind::SingleGoalObstacle => "single_goal_obstacle",
            TaskKind::Mpa => "mpa",
            TaskKind::MpaObstacle => "mpa_obstacle",
            TaskKind::MpaDistractor => "mpa_distractor",
        }
    }

    pub fn has_obstacles(self) -> bool {
        matches!(self, TaskKind::SingleGoalObstacle | TaskKind::MpaObstacle)
    }
}

/// MPA cue-set conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpaCondition {
    Opa,
    Npa2,
    Npa6,
    Nm,
    Npa6Nm,
    Npa12,
}

impl MpaCondition {
    pub fn label(self) -> &'static str {
        match self {
            MpaCondition::Opa => "opa",
            MpaCondition::Npa2 => "2npa",
            MpaCondition::Npa6 => "6npa",
            MpaCondition::Nm => "nm",
            MpaCondition::Npa6Nm => "6npanm",
            MpaCondition::Npa12 => "12npa",
        }
    }
}

/// When the task-relevant cue is on during a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueTiming {
    pub onset_s: f64,
    pub offset_s: f64,
    /// Place cells and actions are silenced while the cue window is open
    /// (modeling the animal in the start box).
    pub silence_during_cue: bool,
}

impl CueTiming {
    pub fn whole_trial() -> Self {
        Self { onset_s: 0.0, offset_s: f64::INFINITY, silence_during_cue: false }
    }

    /// Transient presentation: 1 s delay, 2 s window, silenced.
    pub fn transient() -> Self {
        Self { onset_s: 1.0, offset_s: 3.0, silence_during_cue: true }
    }

    /// Navigation begins when the cue window closes (or immediately for
    /// whole-trial cues).
    pub fn navigation_onset(&self) -> f64 {
        if self.offset_s.is_finite() { self.offset_s } else { 0.0 }
    }
}

/// A transient distractor cue pulse. Onset is measured from trial start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistractorEvent {
    pub cue: u8,
    pub onset_s: f64,
    pub duration_s: f64,
}

/// One trial of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub cue: u8,
    /// Index into the arena's reward-site grid.
    pub goal_site: usize,
    pub start: Wall,
    pub probe: bool,
    pub t_max_s: f64,
    pub cue_timing: CueTiming,
    pub distractors: Vec<DistractorEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub trials: Vec<TrialPlan>,
    /// Probe sessions hold non-rewarded trials only.
    pub probe_session: bool,
}

/// Full plan for one task phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSchedule {
    pub kind: TaskKind,
    pub condition: MpaCondition,
    pub sessions: Vec<SessionPlan>,
    /// The active cue -> goal-site pairing (the candidate set for visit
    /// ratios). Empty for DMP/single-goal tasks.
    pub goal_set: Vec<(u8, usize)>,
}

/// Knobs with task-specific defaults; every value is overridable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub sessions: usize,
    pub t_max_s: f64,
    pub probe_t_max_s: f64,
    /// Insert a probe session after these 1-based training sessions.
    pub probe_after: Vec<usize>,
    /// Distractors per trial (distractor task only).
    pub distractor_count: usize,
}

impl ScheduleParams {
    pub fn defaults_for(kind: TaskKind) -> Self {
        match kind {
            TaskKind::Dmp => Self {
                sessions: 9,
                t_max_s: 600.0,
                probe_t_max_s: 60.0,
                probe_after: vec![],
                distractor_count: 0,
            },
            TaskKind::SingleGoalObstacle => Self {
                sessions: 1,
                t_max_s: 600.0,
                probe_t_max_s: 60.0,
                probe_after: vec![],
                distractor_count: 0,
            },
            TaskKind::Mpa | TaskKind::MpaDistractor => Self {
                sessions: 20,
                t_max_s: 600.0,
                probe_t_max_s: 60.0,
                probe_after: vec![2, 9, 16],
                distractor_count: if kind == TaskKind::MpaDistractor { 1 } else { 0 },
            },
            TaskKind::MpaObstacle => Self {
                sessions: 50,
                t_max_s: 600.0,
                probe_t_max_s: 60.0,
                probe_after: vec![2, 18, 36],
                distractor_count: 0,
            },
        }
    }
}

/// Cue -> goal-site maps for every MPA condition, drawn once per
/// experiment seed. 2NPA swaps cues 7 and 8 into the slots of cues 1 and 6;
/// 6NPA, 6NPANM and 12NPA pair new cues with fresh sites drawn from the
/// locations not used by the original set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpaMaps {
    pub opa: Vec<(u8, usize)>,
    pub npa2: Vec<(u8, usize)>,
    pub npa6: Vec<(u8, usize)>,
    pub npa6nm: Vec<(u8, usize)>,
    pub npa12: Vec<(u8, usize)>,
}

impl MpaMaps {
    pub fn generate(arena: &Arena, rng: &mut ChaCha12Rng) -> Self {
        let valid = arena.valid_goal_sites();
        assert!(valid.len() >= 24, "not enough obstacle-free sites");
        let mut pool = valid.clone();
        pool.shuffle(rng);
        let opa_sites: Vec<usize> = pool.drain(..6).collect();
        let opa: Vec<(u8, usize)> = (1..=6).map(|c| (c as u8, opa_sites[c - 1])).collect();

        let mut npa2 = opa.clone();
        npa2[0] = (7, opa[0].1);
        npa2[5] = (8, opa[5].1);

        let npa6_sites: Vec<usize> = pool.drain(..6).collect();
        let npa6: Vec<(u8, usize)> = (0..6).map(|i| (11 + i as u8, npa6_sites[i])).collect();

        let npa6nm_sites: Vec<usize> = pool.drain(..6).collect();
        let npa6nm_cues = [7u8, 8, 9, 10, 17, 18];
        let npa6nm: Vec<(u8, usize)> =
            (0..6).map(|i| (npa6nm_cues[i], npa6nm_sites[i])).collect();

        // 12 new pairs drawn from the sites not used by the original six.
        let mut remaining: Vec<usize> =
            valid.iter().copied().filter(|s| !opa_sites.contains(s)).collect();
        remaining.shuffle(rng);
        let npa12: Vec<(u8, usize)> =
            (0..12).map(|i| (7 + i as u8, remaining[i])).collect();

        Self { opa, npa2, npa6, npa6nm, npa12 }
    }

    pub fn pairs(&self, condition: MpaCondition) -> &[(u8, usize)] {
        match condition {
            MpaCondition::Opa => &self.opa,
            MpaCondition::Npa2 => &self.npa2,
            // The new-maze condition re-uses the 6NPA pairing; novelty comes
            // from the shuffled place fields.
            MpaCondition::Npa6 | MpaCondition::Nm => &self.npa6,
            MpaCondition::Npa6Nm => &self.npa6nm,
            MpaCondition::Npa12 => &self.npa12,
        }
    }
}

/// Allowed start walls per cue for the obstacle MPA task.
pub fn obstacle_start_walls(cue: u8) -> Vec<Wall> {
    let mut walls = Vec::new();
    if [1, 4, 5, 7, 11, 13, 14].contains(&cue) {
        walls.push(Wall::East);
    }
    if [3, 4, 5, 6, 8, 15, 16].contains(&cue) {
        walls.push(Wall::North);
    }
    if [2, 3, 6, 8, 12, 15, 16].contains(&cue) {
        walls.push(Wall::West);
    }
    if [1, 2, 3, 4, 7, 11, 12, 13, 15].contains(&cue) {
        walls.push(Wall::South);
    }
    if walls.is_empty() {
        walls.extend(Wall::ALL);
    }
    walls
}

/// Distractor onsets: a 0.2 Hz point process beginning 6 s after navigation
/// onset, truncated to exactly `count` events; each event is cue 17 or 18
/// for one second. Onsets are relative to navigation onset.
pub fn distractor_schedule(rng: &mut ChaCha12Rng, count: usize) -> Vec<DistractorEvent> {
    assert!(count == 1 || count == 2, "count must be 1 or 2");
    let mut events = Vec::with_capacity(count);
    let mut t = 6.0;
    for _ in 0..count {
        let gap: f64 = rng.gen::<f64>();
        t += -5.0 * (1.0 - gap).ln(); // Exp(rate 0.2 Hz)
        let cue = if rng.gen::<bool>() { 17 } else { 18 };
        events.push(DistractorEvent { cue, onset_s: t, duration_s: 1.0 });
    }
    events
}

fn random_wall(rng: &mut ChaCha12Rng, allowed: &[Wall]) -> Wall {
    *allowed.choose(rng).unwrap()
}

/// Build the plan for one phase of a task.
///
/// For the MPA family, `condition` selects both the cue-goal pairing and the
/// phase shape: OPA is the long training stage; the new-pair and new-maze
/// conditions are one training session followed by a probe session.
pub fn build_schedule(
    kind: TaskKind,
    condition: MpaCondition,
    params: &ScheduleParams,
    arena: &Arena,
    maps: &MpaMaps,
    rng: &mut ChaCha12Rng,
) -> Result<TaskSchedule, ConfigError> {
    match kind {
        TaskKind::Dmp | TaskKind::SingleGoalObstacle => {
            if condition != MpaCondition::Opa {
                return Err(ConfigError::Invalid(format!(
                    "{} does not take condition {}",
                    kind.label(),
                    condition.label()
                )));
            }
        }
        _ => {}
    }
    let schedule = match kind {
        TaskKind::Dmp => build_dmp(params, arena, rng),
        TaskKind::SingleGoalObstacle => build_single_goal_obstacle(params, arena, rng)?,
        TaskKind::Mpa | TaskKind::MpaObstacle | TaskKind::MpaDistractor => {
            build_mpa_phase(kind, condition, params, maps, rng)
        }
    };
    Ok(schedule)
}

fn build_dmp(params: &ScheduleParams, arena: &Arena, rng: &mut ChaCha12Rng) -> TaskSchedule {
    let sites = arena.valid_goal_sites();
    let mut sessions = Vec::with_capacity(params.sessions);
    let mut prev_site = usize::MAX;
    for _ in 0..params.sessions {
        // A fresh goal each session, never repeating the previous one.
        let site = loop {
            let s = *sites.choose(rng).unwrap();
            if s != prev_site {
                break s;
            }
        };
        prev_site = site;
        let mut trials = Vec::with_capacity(5);
        for _ in 0..4 {
            trials.push(TrialPlan {
                cue: 1,
                goal_site: site,
                start: random_wall(rng, &Wall::ALL),
                probe: false,
                t_max_s: params.t_max_s,
                cue_timing: CueTiming::whole_trial(),
                distractors: vec![],
            });
        }
        // Probe after the fourth trial of every session.
        trials.push(TrialPlan {
            cue: 1,
            goal_site: site,
            start: random_wall(rng, &Wall::ALL),
            probe: true,
            t_max_s: params.probe_t_max_s,
            cue_timing: CueTiming::whole_trial(),
            distractors: vec![],
        });
        sessions.push(SessionPlan { trials, probe_session: false });
    }
    TaskSchedule { kind: TaskKind::Dmp, condition: MpaCondition::Opa, sessions, goal_set: vec![] }
}

fn build_single_goal_obstacle(
    params: &ScheduleParams,
    arena: &Arena,
    rng: &mut ChaCha12Rng,
) -> Result<TaskSchedule, ConfigError> {
    // Goal fixed at the arena center, inside the inverted U.
    let site = arena
        .reward_sites
        .iter()
        .position(|s| s[0].abs() < 1e-9 && s[1].abs() < 1e-9)
        .ok_or_else(|| ConfigError::Invalid("no central reward site".into()))?;
    let starts = [Wall::North, Wall::East, Wall::West];
    let probe_trials: Vec<usize> =
        (7..=12).chain(31..=36).chain(55..=60).collect();
    let mut trials = Vec::with_capacity(60);
    for idx in 1..=60usize {
        let probe = probe_trials.contains(&idx);
        trials.push(TrialPlan {
            cue: 1,
            goal_site: site,
            start: random_wall(rng, &starts),
            probe,
            t_max_s: if probe { params.probe_t_max_s } else { params.t_max_s },
            cue_timing: CueTiming::whole_trial(),
            distractors: vec![],
        });
    }
    Ok(TaskSchedule {
        kind: TaskKind::SingleGoalObstacle,
        condition: MpaCondition::Opa,
        sessions: vec![SessionPlan { trials, probe_session: false }],
        goal_set: vec![(1, site)],
    })
}

fn build_mpa_phase(
    kind: TaskKind,
    condition: MpaCondition,
    params: &ScheduleParams,
    maps: &MpaMaps,
    rng: &mut ChaCha12Rng,
) -> TaskSchedule {
    let n_train_sessions = if condition == MpaCondition::Opa { params.sessions } else { 1 };
    let probe_after = if condition == MpaCondition::Opa {
        params.probe_after.clone()
    } else {
        vec![n_train_sessions]
    };
    build_mpa_custom(kind, condition, n_train_sessions, &probe_after, params, maps, rng)
}

/// MPA-family phase with explicit session count and probe placement; the
/// condition picks the cue-goal pairing.
pub fn build_mpa_custom(
    kind: TaskKind,
    condition: MpaCondition,
    n_train_sessions: usize,
    probe_after: &[usize],
    params: &ScheduleParams,
    maps: &MpaMaps,
    rng: &mut ChaCha12Rng,
) -> TaskSchedule {
    let pairs: Vec<(u8, usize)> = maps.pairs(condition).to_vec();
    let timing = if kind == TaskKind::MpaDistractor {
        CueTiming::transient()
    } else {
        CueTiming::whole_trial()
    };

    let make_trial = |cue: u8, site: usize, probe: bool, rng: &mut ChaCha12Rng| {
        let allowed = if kind == TaskKind::MpaObstacle {
            obstacle_start_walls(cue)
        } else {
            Wall::ALL.to_vec()
        };
        let distractors = if kind == TaskKind::MpaDistractor && params.distractor_count > 0 {
            distractor_schedule(rng, params.distractor_count)
                .into_iter()
                .map(|d| DistractorEvent {
                    cue: d.cue,
                    onset_s: timing.navigation_onset() + d.onset_s,
                    duration_s: d.duration_s,
                })
                .collect()
        } else {
            vec![]
        };
        TrialPlan {
            cue,
            goal_site: site,
            start: random_wall(rng, &allowed),
            probe,
            t_max_s: if probe { params.probe_t_max_s } else { params.t_max_s },
            cue_timing: timing,
            distractors,
        }
    };

    let mut sessions = Vec::new();
    for session_idx in 1..=n_train_sessions {
        let mut order = pairs.clone();
        order.shuffle(rng);
        let trials =
            order.iter().map(|&(c, s)| make_trial(c, s, false, rng)).collect::<Vec<_>>();
        sessions.push(SessionPlan { trials, probe_session: false });
        if probe_after.contains(&session_idx) {
            let mut order = pairs.clone();
            order.shuffle(rng);
            let trials =
                order.iter().map(|&(c, s)| make_trial(c, s, true, rng)).collect::<Vec<_>>();
            sessions.push(SessionPlan { trials, probe_session: true });
        }
    }
    TaskSchedule { kind, condition, sessions, goal_set: pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, stream};

    fn rng(seed: u64) -> ChaCha12Rng {
        stream_rng(seed, stream::SCHEDULE)
    }

    #[test]
    fn dmp_shape() {
        let arena = Arena::open();
        let maps = MpaMaps::generate(&arena, &mut rng(1));
        let params = ScheduleParams::defaults_for(TaskKind::Dmp);
        let s = build_schedule(TaskKind::Dmp, MpaCondition::Opa, &params, &arena, &maps, &mut rng(1))
            .unwrap();
        assert_eq!(s.sessions.len(), 9);
        for session in &s.sessions {
            assert_eq!(session.trials.len(), 5);
            let goal = session.trials[0].goal_site;
            assert!(session.trials.iter().all(|t| t.goal_site == goal));
            assert!(session.trials[4].probe);
            assert_eq!(session.trials[4].t_max_s, 60.0);
            assert!(session.trials[..4].iter().all(|t| !t.probe));
        }
        // Goals move between sessions.
        let goals: Vec<usize> = s.sessions.iter().map(|x| x.trials[0].goal_site).collect();
        for w in goals.windows(2) {
            assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn mpa_opa_shape() {
        let arena = Arena::open();
        let maps = MpaMaps::generate(&arena, &mut rng(2));
        let params = ScheduleParams::defaults_for(TaskKind::Mpa);
        let s = build_schedule(TaskKind::Mpa, MpaCondition::Opa, &params, &arena, &maps, &mut rng(2))
            .unwrap();
        let train: Vec<_> = s.sessions.iter().filter(|x| !x.probe_session).collect();
        let probes: Vec<_> = s.sessions.iter().filter(|x| x.probe_session).collect();
        assert_eq!(train.len(), 20);
        assert_eq!(probes.len(), 3);
        for session in train {
            let mut cues: Vec<u8> = session.trials.iter().map(|t| t.cue).collect();
            cues.sort_unstable();
            assert_eq!(cues, vec![1, 2, 3, 4, 5, 6]);
        }
        // Probe sessions appear right after training sessions 2, 9, 16.
        let probe_positions: Vec<usize> = s
            .sessions
            .iter()
            .enumerate()
            .filter(|(_, x)| x.probe_session)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(probe_positions, vec![2, 10, 18]);
    }

    #[test]
    fn maps_follow_replacement_rules() {
        let arena = Arena::open();
        let maps = MpaMaps::generate(&arena, &mut rng(3));
        assert_eq!(maps.npa2[0].0, 7);
        assert_eq!(maps.npa2[0].1, maps.opa[0].1);
        assert_eq!(maps.npa2[5].0, 8);
        assert_eq!(maps.npa2[5].1, maps.opa[5].1);
        for i in 1..5 {
            assert_eq!(maps.npa2[i], maps.opa[i]);
        }
        let opa_sites: Vec<usize> = maps.opa.iter().map(|p| p.1).collect();
        for &(cue, site) in &maps.npa6 {
            assert!((11..=16).contains(&cue));
            assert!(!opa_sites.contains(&site), "6NPA sites are new");
        }
        assert_eq!(maps.npa12.len(), 12);
        for &(_, site) in &maps.npa12 {
            assert!(!opa_sites.contains(&site), "12NPA uses the 43 remaining sites");
        }
        let mut sites12: Vec<usize> = maps.npa12.iter().map(|p| p.1).collect();
        sites12.sort_unstable();
        sites12.dedup();
        assert_eq!(sites12.len(), 12);
    }

    #[test]
    fn obstacle_starts_follow_table() {
        assert_eq!(obstacle_start_walls(1), vec![Wall::East, Wall::South]);
        assert_eq!(obstacle_start_walls(2), vec![Wall::West, Wall::South]);
        assert_eq!(obstacle_start_walls(14), vec![Wall::East]);
        let arena = Arena::mpa_obstacle();
        let maps = MpaMaps::generate(&arena, &mut rng(4));
        let params = ScheduleParams::defaults_for(TaskKind::MpaObstacle);
        let s = build_schedule(
            TaskKind::MpaObstacle,
            MpaCondition::Opa,
            &params,
            &arena,
            &maps,
            &mut rng(4),
        )
        .unwrap();
        for session in &s.sessions {
            for t in &session.trials {
                assert!(obstacle_start_walls(t.cue).contains(&t.start));
            }
        }
    }

    #[test]
    fn invalid_combination_rejected() {
        let arena = Arena::open();
        let maps = MpaMaps::generate(&arena, &mut rng(5));
        let params = ScheduleParams::defaults_for(TaskKind::Dmp);
        let err =
            build_schedule(TaskKind::Dmp, MpaCondition::Npa6, &params, &arena, &maps, &mut rng(5));
        assert!(err.is_err());
    }

    #[test]
    fn schedules_reproducible_from_seed() {
        let arena = Arena::open();
        for kind in [TaskKind::Dmp, TaskKind::Mpa, TaskKind::MpaDistractor] {
            let params = ScheduleParams::defaults_for(kind);
            let maps_a = MpaMaps::generate(&arena, &mut rng(11));
            let maps_b = MpaMaps::generate(&arena, &mut rng(11));
            assert_eq!(maps_a, maps_b);
            let a = build_schedule(kind, MpaCondition::Opa, &params, &arena, &maps_a, &mut rng(12))
                .unwrap();
            let b = build_schedule(kind, MpaCondition::Opa, &params, &arena, &maps_b, &mut rng(12))
                .unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
        }
    }

    #[test]
    fn distractor_events_follow_process() {
        let mut r = rng(21);
        for _ in 0..50 {
            let events = distractor_schedule(&mut r, 1);
            assert_eq!(events.len(), 1);
            assert!(events[0].onset_s > 6.0);
            assert!(events[0].cue == 17 || events[0].cue == 18);
            assert_eq!(events[0].duration_s, 1.0);
        }
        // Monte-Carlo oracle: the inter-onset gap of the 0.2 Hz process
        // averages 5 s.
        let mut gaps = Vec::new();
        for _ in 0..4000 {
            let events = distractor_schedule(&mut r, 2);
            gaps.push(events[1].onset_s - events[0].onset_s);
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean - 5.0).abs() < 0.5, "mean gap {mean}");
    }

    #[test]
    fn distractor_trials_carry_events() {
        let arena = Arena::open();
        let maps = MpaMaps::generate(&arena, &mut rng(31));
        let mut params = ScheduleParams::defaults_for(TaskKind::MpaDistractor);
        params.distractor_count = 2;
        params.sessions = 2;
        params.probe_after = vec![2];
        let s = build_schedule(
            TaskKind::MpaDistractor,
            MpaCondition::Opa,
            &params,
            &arena,
            &maps,
            &mut rng(31),
        )
        .unwrap();
        for session in &s.sessions {
            for t in &session.trials {
                assert_eq!(t.cue_timing, CueTiming::transient());
                assert_eq!(t.distractors.len(), 2);
                for d in &t.distractors {
                    // Navigation starts at 3 s; events begin 6 s later.
                    assert!(d.onset_s > 9.0);
                }
            }
        }
    }
}
