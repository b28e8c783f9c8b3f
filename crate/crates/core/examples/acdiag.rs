//! Dev diagnostic: actor-critic internals across a few DMP sessions.

use schema_nav_core::agents::{run_trial, Agent, AgentKind, AgentParams, RecordOpts};
use schema_nav_core::environment::schedule::{build_schedule, MpaCondition, MpaMaps, ScheduleParams, TaskKind};
use schema_nav_core::environment::{Arena, PlaceCellField};
use schema_nav_core::rng::{stream, stream_rng};

fn main() {
    let arena = Arena::open();
    let field = PlaceCellField::standard();
    let mut rng = stream_rng(0, stream::SCHEDULE);
    let maps = MpaMaps::generate(&arena, &mut rng);
    let mut params_s = ScheduleParams::defaults_for(TaskKind::Dmp);
    params_s.sessions = 4;
    let schedule = build_schedule(TaskKind::Dmp, MpaCondition::Opa, &params_s, &arena, &maps, &mut rng).unwrap();

    let mut params = AgentParams::new(AgentKind::ActorCritic, 0);
    params.reservoir_n = 512;
    let mut agent = Agent::build(params);

    for (si, session) in schedule.sessions.iter().enumerate() {
        for (ti, trial) in session.trials.iter().enumerate() {
            let r = if trial.probe { 0.0 } else { 5.0 };
            let out = run_trial(&mut agent, &arena, &field, trial, r, &[], RecordOpts::default());
            let w = &agent.actor.w_actor.data;
            let wmax = w.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
            let wc = &agent.critic.as_ref().unwrap().w_critic;
            let wcmax = wc.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
            let rho_max = agent.actor.rho.iter().cloned().fold(0.0f64, f64::max);
            println!(
                "s{} t{} probe={} lat={:.0} rewarded={} |Wa|max={:.3} |Wc|max={:.3} v={:.2} delta={:.3} rho_max={:.2}",
                si + 1, ti + 1, trial.probe, out.latency_s, out.rewarded,
                wmax, wcmax, agent.critic.as_ref().unwrap().v, agent.diag.delta_da, rho_max
            );
        }
    }
}
