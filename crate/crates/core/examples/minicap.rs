//! Dev check: capacity-curve orderings at reduced scale.

use schema_nav_core::goal_memory::{capacity_auc, capacity_experiment, GoalArch, GoalRule};

fn main() {
    let n_assoc: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seeds = 3;
    for (arch, rule) in [
        (GoalArch::Feedforward, GoalRule::Lms),
        (GoalArch::Feedforward, GoalRule::Eh),
        (GoalArch::Reservoir, GoalRule::Lms),
        (GoalArch::Reservoir, GoalRule::Eh),
    ] {
        for n in [128usize, 1024] {
            let t0 = std::time::Instant::now();
            let mut aucs = Vec::new();
            let mut first = Vec::new();
            let mut last = Vec::new();
            for seed in 0..seeds {
                let curve = capacity_experiment(arch, rule, n, n_assoc, seed);
                aucs.push(capacity_auc(&curve));
                first.push(curve[0].mse);
                last.push(curve[n_assoc - 1].mse);
            }
            println!(
                "{arch:?} {rule:?} N={n}: auc {:?} mse(1) {:.4} mse(n) {:.4} ({:.0}s)",
                aucs.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
                first.iter().sum::<f64>() / seeds as f64,
                last.iter().sum::<f64>() / seeds as f64,
                t0.elapsed().as_secs_f64(),
            );
        }
    }
}
