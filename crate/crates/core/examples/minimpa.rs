//! Dev check: MPA training + condition branches at reduced scale.

use schema_nav_core::agents::AgentKind;
use schema_nav_core::environment::schedule::{MpaCondition, TaskKind};
use schema_nav_core::harness::config::{AgentSetup, ExperimentSpec};
use schema_nav_core::harness::metrics::mean;
use schema_nav_core::harness::runner::run_seed;

fn main() {
    let sessions: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let seeds: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut spec = ExperimentSpec::new("minimpa", TaskKind::Mpa);
    spec.overrides.reservoir_n = Some(512);
    spec.overrides.t_max_s = Some(300.0);
    spec.overrides.sessions = Some(sessions);
    spec.overrides.probe_after = Some(vec![2, sessions / 2, sessions - 1]);
    spec.overrides.conditions =
        Some(vec![MpaCondition::Opa, MpaCondition::Npa2, MpaCondition::Npa6, MpaCondition::Nm]);

    for kind in [AgentKind::ActorCritic, AgentKind::SymbolicSchema, AgentKind::NeuralSchema] {
        let mut setup = AgentSetup::new(kind);
        setup.symbolic_nav = true;
        let t0 = std::time::Instant::now();
        let mut ratios: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
        let mut early_lat = Vec::new();
        let mut late_lat = Vec::new();
        for seed in 0..seeds {
            let tables = run_seed(&spec, &setup, seed);
            for t in tables.trials.iter().filter(|t| !t.probe && t.phase == "train") {
                if t.session <= 2 {
                    early_lat.push(t.latency_s);
                } else if t.session >= sessions - 1 {
                    late_lat.push(t.latency_s);
                }
            }
            // Per-seed pooled visit ratio per phase+session.
            let mut pooled: std::collections::BTreeMap<String, (f64, f64)> = Default::default();
            for p in &tables.probes {
                let key = format!("{}{}", p.phase, if p.phase == "train" { p.session.to_string() } else { String::new() });
                let e = pooled.entry(key).or_insert((0.0, 0.0));
                e.0 += p.time_correct_s;
                e.1 += p.time_any_s;
            }
            for (k, (c, a)) in pooled {
                if a > 0.0 {
                    ratios.entry(k).or_default().push(c / a);
                }
            }
        }
        println!(
            "{}: early lat {:.0}s late lat {:.0}s  ({:.0}s wall)",
            kind.label(),
            mean(&early_lat),
            mean(&late_lat),
            t0.elapsed().as_secs_f64()
        );
        for (k, v) in &ratios {
            println!("   {k}: visit ratios {:?} mean {:.2}", v.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(), mean(v));
        }
    }
}
