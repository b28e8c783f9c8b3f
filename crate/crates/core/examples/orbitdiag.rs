//! Dev diagnostic: what does the symbolic agent do on the trial after a
//! successful one? Distance-to-goal percentiles and recall/delete timing.

use schema_nav_core::agents::{run_trial, Agent, AgentKind, AgentParams, RecordOpts};
use schema_nav_core::environment::schedule::{build_schedule, MpaCondition, MpaMaps, ScheduleParams, TaskKind};
use schema_nav_core::environment::{Arena, PlaceCellField};
use schema_nav_core::rng::{stream, stream_rng};

fn main() {
    let seed = 1;
    let arena = Arena::open();
    let field = PlaceCellField::standard();
    let mut rng = stream_rng(seed, stream::SCHEDULE);
    let maps = MpaMaps::generate(&arena, &mut rng);
    let mut sp = ScheduleParams::defaults_for(TaskKind::Dmp);
    sp.t_max_s = 300.0;
    let schedule =
        build_schedule(TaskKind::Dmp, MpaCondition::Opa, &sp, &arena, &maps, &mut rng).unwrap();
    let mut agent = Agent::build(AgentParams::new(AgentKind::SymbolicSchema, seed));

    for (si, session) in schedule.sessions.iter().enumerate() {
        let goal = arena.reward_sites[session.trials[0].goal_site];
        for (ti, trial) in session.trials.iter().enumerate() {
            let r = if trial.probe { 0.0 } else { 5.0 };
            let out = run_trial(
                &mut agent, &arena, &field, trial, r, &[],
                RecordOpts { trajectory: true, gate_trace: false },
            );
            if ti >= 1 && ti < 4 && out.latency_s > 60.0 {
                // Slow non-first trial: characterize time near the goal.
                let mut d: Vec<f64> = out
                    .trajectory
                    .iter()
                    .map(|p| ((p.x - goal[0]).powi(2) + (p.y - goal[1]).powi(2)).sqrt())
                    .collect();
                let n = d.len();
                let w05 = d.iter().filter(|&&x| x <= 0.05).count() as f64 * 0.02;
                let w10 = d.iter().filter(|&&x| x <= 0.1).count() as f64 * 0.02;
                let w20 = d.iter().filter(|&&x| x <= 0.2).count() as f64 * 0.02;
                d.sort_by(f64::total_cmp);
                println!(
                    "s{} t{} lat={:.0} rew={}: dist p10={:.3} p25={:.3} p50={:.3} | s within 0.05={:.1} 0.1={:.1} 0.2={:.1} of {:.0}s",
                    si + 1, ti + 1, out.latency_s, out.rewarded,
                    d[n / 10], d[n / 4], d[n / 2],
                    w05, w10, w20,
                    n as f64 * 0.02
                );
            }
        }
    }
}
