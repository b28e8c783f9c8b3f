//! Dev sweep: actor-critic learning-rate grid on a short MPA stage.

use schema_nav_core::agents::AgentKind;
use schema_nav_core::environment::schedule::TaskKind;
use schema_nav_core::harness::config::{AgentSetup, ExperimentSpec};
use schema_nav_core::harness::metrics::mean;
use schema_nav_core::harness::runner::run_seed;

fn main() {
    for (eta_a, eta_c) in [
        (5e-5, 2e-4),
        (1e-5, 2e-4),
        (2e-6, 2e-4),
        (1e-5, 5e-5),
        (2e-6, 5e-5),
        (5e-7, 2e-5),
    ] {
        let mut spec = ExperimentSpec::new("acgrid", TaskKind::Mpa);
        spec.overrides.reservoir_n = Some(512);
        spec.overrides.t_max_s = Some(300.0);
        spec.overrides.sessions = Some(8);
        spec.overrides.probe_after = Some(vec![7]);
        spec.overrides.conditions = Some(vec![]);
        spec.overrides.eta_actor = Some(eta_a);
        spec.overrides.eta_critic = Some(eta_c);
        let setup = AgentSetup::new(AgentKind::ActorCritic);
        let mut early = Vec::new();
        let mut late = Vec::new();
        let mut ratios = Vec::new();
        for seed in 0..2 {
            let t = run_seed(&spec, &setup, seed);
            for r in t.trials.iter().filter(|t| !t.probe) {
                if r.session <= 2 {
                    early.push(r.latency_s);
                } else if r.session >= 7 {
                    late.push(r.latency_s);
                }
            }
            let (mut c, mut a) = (0.0, 0.0);
            for p in &t.probes {
                c += p.time_correct_s;
                a += p.time_any_s;
            }
            if a > 0.0 {
                ratios.push(c / a);
            }
        }
        println!(
            "eta_a={eta_a:.0e} eta_c={eta_c:.0e}: early {:.0}s late {:.0}s probe_ratio {:.2}",
            mean(&early),
            mean(&late),
            if ratios.is_empty() { f64::NAN } else { mean(&ratios) }
        );
    }
}
