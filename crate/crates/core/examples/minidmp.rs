//! Dev check: small DMP run for the three basic agents; prints per-session
//! trial latencies, savings, and weight norms.

use schema_nav_core::agents::AgentKind;
use schema_nav_core::environment::schedule::TaskKind;
use schema_nav_core::harness::config::{AgentSetup, ExperimentSpec};
use schema_nav_core::harness::runner::run_seed;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let seeds: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut spec = ExperimentSpec::new("minidmp", TaskKind::Dmp);
    spec.overrides.reservoir_n = Some(n);
    spec.overrides.t_max_s = Some(300.0);
    for kind in [AgentKind::ActorCritic, AgentKind::SymbolicSchema, AgentKind::NeuralSchema] {
        let mut setup = AgentSetup::new(kind);
        setup.symbolic_nav = true; // no frozen net yet
        let t0 = std::time::Instant::now();
        let mut savings_5_9 = Vec::new();
        for seed in 0..seeds {
            let tables = run_seed(&spec, &setup, seed);
            let mut lat_by_session: Vec<Vec<f64>> = vec![Vec::new(); 9];
            for t in tables.trials.iter().filter(|t| !t.probe) {
                lat_by_session[t.session - 1].push(t.latency_s);
            }
            let s: Vec<f64> = lat_by_session.iter().map(|l| l[0] - l[1]).collect();
            print!("{} seed {seed}: t1/t2 latencies ", kind.label());
            for l in &lat_by_session {
                print!("{:.0}/{:.0} ", l[0], l[1]);
            }
            println!();
            savings_5_9.push(s[4..9].iter().sum::<f64>() / 5.0);
        }
        let mean = savings_5_9.iter().sum::<f64>() / savings_5_9.len() as f64;
        println!(
            "{}: mean savings s5-9 = {:.1} s  ({:.0}s wall)\n",
            kind.label(),
            mean,
            t0.elapsed().as_secs_f64()
        );
    }
}
