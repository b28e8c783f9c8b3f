//! `schema-nav`: train agents on the navigation task battery, probe saved
//! runs, sweep the associative-memory capacity protocol, distill the
//! navigation network, and render reports.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use schema_nav_core::agents::{run_trial, Agent, AgentKind, RecordOpts};
use schema_nav_core::environment::schedule::{
    build_schedule, MpaCondition, MpaMaps, TaskKind,
};
use schema_nav_core::environment::{Arena, PlaceCellField};
use schema_nav_core::goal_memory::{capacity_experiment, GoalArch, GoalRule};
use schema_nav_core::harness::config::{spec_from_toml, AgentSetup, ExperimentSpec};
use schema_nav_core::harness::runner::run_experiment;
use schema_nav_core::harness::snapshot::WeightSnapshot;
use schema_nav_core::harness::{generate_report, run_foraging};
use schema_nav_core::navigator::{
    generate_nav_dataset, load_nav_net, save_nav_net, train_nav_net, NavOptimizer,
    NavTrainConfig,
};
use schema_nav_core::rng::{stream, stream_rng};

/// Environment variable naming the root for relative output paths.
const OUT_ROOT_ENV: &str = "SCHEMA_NAV_OUT";
/// Default location of the frozen navigation network.
const DEFAULT_NAV_NET: &str = "assets/navnet-v1.csv";

#[derive(Parser)]
#[command(name = "schema-nav", about, version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive seed range `a..b` overriding the config.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Path to the frozen navigation network.
        #[arg(long)]
        nav_net: Option<PathBuf>,
    },
    /// Re-run a probe session from a saved weight snapshot.
    Probe {
        /// Snapshot file written by `train` (overrides.save_snapshots).
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        task: String,
        #[arg(long, default_value = "opa")]
        condition: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        nav_net: Option<PathBuf>,
        #[arg(long)]
        reservoir_n: Option<usize>,
    },
    /// Sweep the one-shot association capacity protocol.
    Capacity {
        #[arg(long, default_value = "feedforward,reservoir")]
        arch: String,
        #[arg(long, default_value = "eh,lms")]
        rule: String,
        #[arg(long, default_value = "128,1024")]
        units: String,
        #[arg(long, default_value_t = 50)]
        assocs: usize,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value = "runs/capacity")]
        out: PathBuf,
    },
    /// Train the navigation network and freeze it to a file.
    DistillNav {
        #[arg(long, default_value = DEFAULT_NAV_NET)]
        out: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        rows: usize,
        #[arg(long, default_value_t = 400)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 2e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0.995)]
        lr_decay: f64,
        /// sgd or adam.
        #[arg(long, default_value = "adam")]
        optimizer: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Aggregate a finished run into tables and SVG figures.
    Report {
        #[arg(long)]
        from: PathBuf,
    },
    /// Random-foraging metric-map training (standalone).
    Foraging {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 300.0)]
        seconds: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the learned weight matrix (2 x 49 CSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seeds, out, nav_net } => cmd_train(config, seeds, out, nav_net),
        Command::Probe { snapshot, kind, task, condition, seed, nav_net, reservoir_n } => {
            cmd_probe(snapshot, &kind, &task, &condition, seed, nav_net, reservoir_n)
        }
        Command::Capacity { arch, rule, units, assocs, seeds, out } => {
            cmd_capacity(&arch, &rule, &units, assocs, seeds, out)
        }
        Command::DistillNav { out, rows, epochs, batch, lr, lr_decay, optimizer, seed } => {
            cmd_distill(out, rows, epochs, batch, lr, lr_decay, &optimizer, seed)
        }
        Command::Report { from } => {
            generate_report(&resolve_out(from)).context("report failed")?;
            Ok(())
        }
        Command::Foraging { trials, seconds, seed, out } => {
            let f = run_foraging(trials, seconds, seed);
            println!(
                "foraging: corr_x={:.4} corr_y={:.4} mean_speed={:.3} m/s",
                f.corr_x, f.corr_y, f.mean_speed
            );
            println!(
                "per-trial mean |pi error|: first={:.5} last={:.5}",
                f.per_trial_mean_abs_delta.first().unwrap_or(&f64::NAN),
                f.per_trial_mean_abs_delta.last().unwrap_or(&f64::NAN)
            );
            if let Some(path) = out {
                let path = resolve_out(path);
                let mut text = String::from("cell,w_x,w_y\n");
                for i in 0..49 {
                    text.push_str(&format!(
                        "{i},{:.10e},{:.10e}\n",
                        f.w_coord[i],
                        f.w_coord[49 + i]
                    ));
                }
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

/// Apply the output-root env var to relative paths.
fn resolve_out(path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path;
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) => Path::new(&root).join(path),
        None => path,
    }
}

fn load_nav(path: Option<PathBuf>) -> Option<Arc<schema_nav_core::navigator::NavNet>> {
    let path = path.unwrap_or_else(|| PathBuf::from(DEFAULT_NAV_NET));
    match load_nav_net(&path) {
        Ok(net) => {
            eprintln!(
                "loaded frozen navigation net from {} (held-out agreement {:.3})",
                path.display(),
                net.metrics.argmax_agreement
            );
            Some(Arc::new(net))
        }
        Err(e) => {
            eprintln!(
                "note: no frozen navigation net at {} ({e}); neural agents fall back to the symbolic navigator",
                path.display()
            );
            None
        }
    }
}

fn cmd_train(
    config: PathBuf,
    seeds: Option<String>,
    out: Option<PathBuf>,
    nav_net: Option<PathBuf>,
) -> Result<()> {
    let text = std::fs::read_to_string(&config)
        .with_context(|| format!("reading {}", config.display()))?;
    let mut spec = spec_from_toml(&text).context("parsing experiment config")?;
    if let Some(range) = seeds {
        spec.seeds = parse_seed_range(&range)?;
    }
    if let Some(out) = out {
        spec.out_dir = Some(out);
    }
    spec.out_dir = spec.out_dir.take().map(resolve_out);
    spec.nav_net = load_nav(nav_net);
    let t0 = std::time::Instant::now();
    let tables = run_experiment(&spec).context("experiment failed")?;
    println!(
        "{}: {} trials, {} probe rows in {:.1}s{}",
        spec.name,
        tables.trials.len(),
        tables.probes.len(),
        t0.elapsed().as_secs_f64(),
        spec.out_dir
            .as_ref()
            .map(|d| format!(" -> {}", d.display()))
            .unwrap_or_default()
    );
    Ok(())
}

fn parse_seed_range(text: &str) -> Result<Vec<u64>> {
    let (a, b) = text
        .split_once("..")
        .with_context(|| format!("seed range must look like 0..23, got {text}"))?;
    let a: u64 = a.trim().parse().context("range start")?;
    let b: u64 = b.trim().parse().context("range end")?;
    if b < a {
        bail!("empty seed range {text}");
    }
    Ok((a..=b).collect())
}

fn parse_kind(text: &str) -> Result<AgentKind> {
    for kind in AgentKind::ALL {
        if kind.label() == text {
            return Ok(kind);
        }
    }
    bail!("unknown agent kind {text}")
}

fn parse_task(text: &str) -> Result<TaskKind> {
    for task in [
        TaskKind::Dmp,
        TaskKind::SingleGoalObstacle,
        TaskKind::Mpa,
        TaskKind::MpaObstacle,
        TaskKind::MpaDistractor,
    ] {
        if task.label() == text {
            return Ok(task);
        }
    }
    bail!("unknown task {text}")
}

fn parse_condition(text: &str) -> Result<MpaCondition> {
    for c in [
        MpaCondition::Opa,
        MpaCondition::Npa2,
        MpaCondition::Npa6,
        MpaCondition::Nm,
        MpaCondition::Npa6Nm,
        MpaCondition::Npa12,
    ] {
        if c.label() == text {
            return Ok(c);
        }
    }
    bail!("unknown condition {text}")
}

/// Rebuild the agent for a saved run, restore its weights, and run one
/// probe session of the given condition.
fn cmd_probe(
    snapshot: PathBuf,
    kind: &str,
    task: &str,
    condition: &str,
    seed: u64,
    nav_net: Option<PathBuf>,
    reservoir_n: Option<usize>,
) -> Result<()> {
    let kind = parse_kind(kind)?;
    let task = parse_task(task)?;
    let condition = parse_condition(condition)?;
    let snap = WeightSnapshot::load(&snapshot)
        .with_context(|| format!("loading {}", snapshot.display()))?;

    let mut spec = ExperimentSpec::new("probe", task);
    if let Some(n) = reservoir_n {
        spec.overrides.reservoir_n = Some(n);
    }
    spec.nav_net = load_nav(nav_net);
    let setup = AgentSetup::new(kind);
    let mut agent = Agent::build(spec.agent_params(&setup, seed));
    snap.restore_into(&mut agent).context("restoring weights")?;

    let arena = match task {
        TaskKind::SingleGoalObstacle => Arena::single_goal_obstacle(),
        TaskKind::MpaObstacle => Arena::mpa_obstacle(),
        _ => Arena::open(),
    };
    let field = PlaceCellField::standard();
    let mut rng = stream_rng(seed, stream::SCHEDULE);
    let maps = MpaMaps::generate(&arena, &mut rng);
    let params = spec.schedule_params();
    let schedule = build_schedule(task, condition, &params, &arena, &maps, &mut rng)
        .context("building schedule")?;

    println!("agent,seed,condition,cue,time_correct_s,time_any_s,visit_ratio");
    for session in schedule.sessions.iter().filter(|s| s.probe_session) {
        for trial in &session.trials {
            let out =
                run_trial(&mut agent, &arena, &field, trial, 0.0, &schedule.goal_set, RecordOpts::default());
            let any: f64 = out.zone_times.iter().sum();
            let idx = schedule
                .goal_set
                .iter()
                .position(|&(c, _)| c == trial.cue)
                .unwrap_or(0);
            let correct = out.zone_times.get(idx).copied().unwrap_or(0.0);
            let ratio = if any > 0.0 { format!("{:.4}", correct / any) } else { String::new() };
            println!(
                "{},{seed},{},{},{correct:.3},{any:.3},{ratio}",
                kind.label(),
                condition.label(),
                trial.cue
            );
        }
    }
    Ok(())
}

fn cmd_capacity(
    arch: &str,
    rule: &str,
    units: &str,
    assocs: usize,
    seeds: u64,
    out: PathBuf,
) -> Result<()> {
    let out = resolve_out(out);
    std::fs::create_dir_all(&out)?;
    let arches: Vec<GoalArch> = arch
        .split(',')
        .map(|a| match a.trim() {
            "feedforward" => Ok(GoalArch::Feedforward),
            "reservoir" => Ok(GoalArch::Reservoir),
            other => bail!("unknown arch {other}"),
        })
        .collect::<Result<_>>()?;
    let rules: Vec<GoalRule> = rule
        .split(',')
        .map(|r| match r.trim() {
            "eh" => Ok(GoalRule::Eh),
            "lms" => Ok(GoalRule::Lms),
            other => bail!("unknown rule {other}"),
        })
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = units
        .split(',')
        .map(|u| u.trim().parse().context("unit count"))
        .collect::<Result<_>>()?;

    let mut csv = String::from("arch,rule,n_units,seed,n_assoc,mse\n");
    for &a in &arches {
        for &r in &rules {
            for &n in &sizes {
                for seed in 0..seeds {
                    let curve = capacity_experiment(a, r, n, assocs, seed);
                    for point in &curve {
                        csv.push_str(&format!(
                            "{},{},{n},{seed},{},{:.8e}\n",
                            match a {
                                GoalArch::Feedforward => "feedforward",
                                GoalArch::Reservoir => "reservoir",
                            },
                            match r {
                                GoalRule::Eh => "eh",
                                GoalRule::Lms => "lms",
                            },
                            point.n_assoc,
                            point.mse
                        ));
                    }
                    eprintln!("capacity {a:?} {r:?} N={n} seed={seed} done");
                }
            }
        }
    }
    let path = out.join("capacity.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_distill(
    out: PathBuf,
    rows: usize,
    epochs: usize,
    batch: usize,
    lr: f64,
    lr_decay: f64,
    optimizer: &str,
    seed: u64,
) -> Result<()> {
    let out = resolve_out(out);
    let optimizer = match optimizer {
        "adam" => NavOptimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 },
        "sgd" => NavOptimizer::Sgd { momentum: 0.9 },
        other => bail!("unknown optimizer {other}"),
    };
    let mut rng = stream_rng(seed, stream::NAV_DATA);
    let dataset = generate_nav_dataset(rows, &mut rng);
    let config = NavTrainConfig { epochs, batch, lr, lr_decay, optimizer, hidden: 128, seed };
    let t0 = std::time::Instant::now();
    let net = train_nav_net(&dataset, &config).context("training diverged")?;
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    save_nav_net(&net, &out).context("saving frozen net")?;
    println!(
        "distilled in {:.0}s: held-out mse {:.3e}, argmax agreement {:.4}, suppressed max {:.4} -> {}",
        t0.elapsed().as_secs_f64(),
        net.metrics.held_out_mse,
        net.metrics.argmax_agreement,
        net.metrics.suppressed_max_abs,
        out.display()
    );
    Ok(())
}
