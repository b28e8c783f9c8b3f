//! Dev calibration: realized speeds, exploration coverage, metric-map
//! convergence, and step timing. Run with --release.

use std::time::Instant;

use schema_nav_core::agents::{run_trial, Agent, AgentKind, AgentParams, RecordOpts};
use schema_nav_core::environment::schedule::{CueTiming, TrialPlan};
use schema_nav_core::environment::{Arena, PlaceCellField, Wall};
use schema_nav_core::harness::run_foraging;

fn main() {
    let arena = Arena::open();
    let field = PlaceCellField::standard();

    // 1. Random-walk speed and goal-hit rate for an untrained symbolic agent.
    let mut hits = 0;
    let mut latencies = Vec::new();
    for seed in 0..10u64 {
        let params = AgentParams::new(AgentKind::SymbolicSchema, seed);
        let mut agent = Agent::build(params);
        let trial = TrialPlan {
            cue: 1,
            goal_site: 30,
            start: Wall::South,
            probe: false,
            t_max_s: 300.0,
            cue_timing: CueTiming::whole_trial(),
            distractors: vec![],
        };
        let out = run_trial(&mut agent, &arena, &field, &trial, 5.0, &[], RecordOpts::default());
        let speed = out.path_length / out.latency_s.min(300.0);
        println!(
            "seed {seed}: rewarded={} latency={:.1}s path={:.1}m speed={:.3}m/s",
            out.rewarded, out.latency_s, out.path_length, speed
        );
        if out.rewarded {
            hits += 1;
            latencies.push(out.latency_s);
        }
    }
    println!(
        "exploration: {hits}/10 found goal in 300s, mean latency {:.1}\n",
        latencies.iter().sum::<f64>() / latencies.len().max(1) as f64
    );

    // 2. Step timing at N=512 (actor-critic agent).
    let mut params = AgentParams::new(AgentKind::ActorCritic, 0);
    params.reservoir_n = 512;
    let mut agent = Agent::build(params);
    let trial = TrialPlan {
        cue: 1,
        goal_site: 10,
        start: Wall::North,
        probe: true,
        t_max_s: 60.0,
        cue_timing: CueTiming::whole_trial(),
        distractors: vec![],
    };
    let t0 = Instant::now();
    let out = run_trial(&mut agent, &arena, &field, &trial, 0.0, &[], RecordOpts::default());
    let per_step = t0.elapsed().as_secs_f64() / out.steps as f64;
    println!("actor-critic N=512: {:.1} us/step ({} steps)\n", per_step * 1e6, out.steps);

    // 3. Metric-map foraging convergence (3 trials quick look + full run).
    let t0 = Instant::now();
    let f = run_foraging(20, 300.0, 1);
    println!(
        "foraging 20x300s: corr_x={:.3} corr_y={:.3} mean_speed={:.3} m/s ({:.1}s wall)",
        f.corr_x,
        f.corr_y,
        f.mean_speed,
        t0.elapsed().as_secs_f64()
    );
    println!("per-trial |delta|: {:?}", f.per_trial_mean_abs_delta.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    let resp = schema_nav_core::harness::foraging::x_response_along_axis(&f.w_coord, 9);
    println!("x response along y=0: {:?}", resp.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>());
}
