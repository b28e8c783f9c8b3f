//! Dev diagnostic: trace symbolic-agent trial pairs in depth.

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
            let before_stored = agent.kv.as_ref().unwrap().stored_count();
            let recall_before = {
                let mut cue = vec![0.0; 18];
                schema_nav_core::environment::cue_vector(trial.cue, &mut cue);
                agent.kv.as_ref().unwrap().recall(&cue)
            };
            let out =
                run_trial(&mut agent, &arena, &field, trial, r, &[], RecordOpts::default());
            let kv = agent.kv.as_ref().unwrap();
            let stored = kv.stored_count();
            let row = kv.values.row(0);
            println!(
                "s{} t{} goal=({:+.2},{:+.2}) start={:?} lat={:>5.1} rew={} stored {}->{} | recall_pre=({:+.2},{:+.2},{:.2}) | kv_now=({:+.2},{:+.2},{:.0})",
                si + 1, ti + 1, goal[0], goal[1], trial.start, out.latency_s, out.rewarded,
                before_stored, stored,
                recall_before.x, recall_before.y, recall_before.recall_value,
                row[0], row[1], row[2],
            );
        }
    }
}
