//! Measure direct-heading speed: symbolic agent with a pre-stored association.
use schema_nav_core::agents::{run_trial, Agent, AgentKind, AgentParams, RecordOpts};
use schema_nav_core::environment::schedule::{CueTiming, TrialPlan};
use schema_nav_core::environment::{cue_vector, Arena, PlaceCellField, Wall, N_CUES};

fn main() {
    let arena = Arena::open();
    let field = PlaceCellField::standard();
    // Pretend the metric map is perfect: wire the coordinate weights to the
    // least-squares solution? Instead: give the agent a converged-ish map by
    // running foraging... quick hack: set W_coord so p ~ position using the
    // known linear regression of pc -> x,y. Compute via normal equations on a grid.
    let mut params = AgentParams::new(AgentKind::SymbolicSchema, 3);
    params.reservoir_n = 8;
    let mut agent = Agent::build(params);
    // Fit W (2x49) by ridge regression on a 41x41 grid of positions.
    let mut ata = vec![0.0f64; 49 * 49];
    let mut atb = vec![0.0f64; 49 * 2];
    let mut pc = vec![0.0; 49];
    for iy in 0..41 {
        for ix in 0..41 {
            let s = [-0.8 + 1.6 * ix as f64 / 40.0, -0.8 + 1.6 * iy as f64 / 40.0];
            field.activity(s, &mut pc);
            for i in 0..49 {
                for j in 0..49 {
                    ata[i * 49 + j] += pc[i] * pc[j];
                }
                atb[i * 2] += pc[i] * s[0];
                atb[i * 2 + 1] += pc[i] * s[1];
            }
        }
    }
    for i in 0..49 { ata[i * 49 + i] += 1e-6; }
    // Gauss elimination
    let mut a = ata.clone();
    let mut b = atb.clone();
    for col in 0..49 {
        let mut piv = col;
        for r in col + 1..49 { if a[r * 49 + col].abs() > a[piv * 49 + col].abs() { piv = r; } }
        for k in 0..49 { a.swap(col * 49 + k, piv * 49 + k); }
        b.swap(col * 2, piv * 2); b.swap(col * 2 + 1, piv * 2 + 1);
        let d = a[col * 49 + col];
        for r in 0..49 {
            if r == col { continue; }
            let f = a[r * 49 + col] / d;
            for k in col..49 { a[r * 49 + k] -= f * a[col * 49 + k]; }
            b[r * 2] -= f * b[col * 2];
            b[r * 2 + 1] -= f * b[col * 2 + 1];
        }
    }
    for i in 0..49 {
        let d = a[i * 49 + i];
        agent.coord.as_mut().unwrap().w_coord.set(0, i, b[i * 2] / d);
        agent.coord.as_mut().unwrap().w_coord.set(1, i, b[i * 2 + 1] / d);
    }
    // Store association: cue 1 -> goal at (0.4, 0.2) == site index?
    let goal_site = arena.reward_sites.iter().position(|s| (s[0] - 0.4).abs() < 1e-9 && (s[1] - 0.2).abs() < 1e-9).unwrap();
    let mut cue = vec![0.0; N_CUES];
    cue_vector(1, &mut cue);
    agent.kv.as_mut().unwrap().store(1, &cue, [0.4, 0.2]);

    let trial = TrialPlan {
        cue: 1, goal_site, start: Wall::West, probe: false, t_max_s: 300.0,
        cue_timing: CueTiming::whole_trial(), distractors: vec![],
    };
    let out = run_trial(&mut agent, &arena, &field, &trial, 5.0, &[], RecordOpts { trajectory: true, gate_trace: false });
    println!("rewarded={} latency={:.1}s path={:.2}m", out.rewarded, out.latency_s, out.path_length);
    // effective straight-line distance from West start (-0.79, 0) to (0.4, 0.2) = 1.207
    println!("direct-heading speed ~ {:.3} m/s (straight-line 1.21m / latency)", 1.207 / out.latency_s);
    println!("path speed = {:.3} m/s", out.path_length / out.latency_s.min(300.0));
    for p in out.trajectory.iter().step_by(250) {
        println!("t={:.1} pos=({:.2},{:.2})", p.t, p.x, p.y);
    }
}
