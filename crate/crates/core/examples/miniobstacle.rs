//! Dev check: single-goal obstacle task across the five agent kinds.

use schema_nav_core::agents::AgentKind;
use schema_nav_core::environment::schedule::TaskKind;
use schema_nav_core::harness::config::{AgentSetup, ExperimentSpec};
use schema_nav_core::harness::metrics::mean;
use schema_nav_core::harness::runner::run_seed;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut spec = ExperimentSpec::new("miniobs", TaskKind::SingleGoalObstacle);
    spec.overrides.reservoir_n = Some(512);
    spec.overrides.t_max_s = Some(400.0);

    for kind in [
        AgentKind::ActorCritic,
        AgentKind::SymbolicSchema,
        AgentKind::NeuralSchema,
        AgentKind::HybridSymbolic,
        AgentKind::HybridNeural,
    ] {
        let mut setup = AgentSetup::new(kind);
        setup.symbolic_nav = true;
        let t0 = std::time::Instant::now();
        let mut final_lat = Vec::new();
        let mut early_lat = Vec::new();
        let mut probe_time = Vec::new();
        for seed in 0..seeds {
            let t = run_seed(&spec, &setup, seed);
            for r in t.trials.iter().filter(|r| !r.probe) {
                if r.trial <= 6 {
                    early_lat.push(r.latency_s);
                }
                if r.trial == 54 {
                    final_lat.push(r.latency_s);
                }
            }
            let pt: Vec<f64> = t
                .trials
                .iter()
                .filter(|r| r.probe && r.trial >= 55)
                .map(|r| r.time_at_goal_s)
                .collect();
            probe_time.push(mean(&pt));
        }
        println!(
            "{:<16} early {:>5.0}s final {:>5.0}s probe_time_at_goal {:>5.1}s ({:.0}s wall)",
            kind.label(),
            mean(&early_lat),
            mean(&final_lat),
            mean(&probe_time),
            t0.elapsed().as_secs_f64()
        );
    }
}
