//! Report generation: aggregate the metric CSVs of a finished run into
//! summary tables and SVG figures. Every number in the figures comes from
//! the CSVs, so regenerating a report never re-runs simulations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::ConfigError;
use crate::harness::metrics::{mean, sd, stats, visit_ratio};
use crate::harness::rows::ExperimentTables;
use crate::harness::svg::{bar_plot, line_plot, Bar, LineSeries};

/// Chance visit ratio with six candidate goals.
pub const CHANCE_SIX: f64 = 1.0 / 6.0;

/// Build `report/` under the run directory from its CSVs. Fails with an
/// explicit error when there is no data to report.
pub fn generate_report(run_dir: &Path) -> Result<(), ConfigError> {
    let tables = ExperimentTables::read_csv_files(run_dir)?;
    if tables.trials.is_empty() && tables.probes.is_empty() {
        return Err(ConfigError::Invalid(format!(
            "no data to report under {}",
            run_dir.display()
        )));
    }
    let out = run_dir.join("report");
    std::fs::create_dir_all(&out)?;

    latency_figure(&tables, &out)?;
    savings_figure(&tables, &out)?;
    visit_ratio_figure(&tables, &out)?;
    gate_figure(&tables, &out)?;
    capacity_figure(run_dir, &out)?;
    Ok(())
}

/// Mean training latency by session, one line per agent.
fn latency_figure(tables: &ExperimentTables, out: &Path) -> Result<(), ConfigError> {
    let mut by: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for t in tables.trials.iter().filter(|t| t.phase == "train" && !t.probe) {
        by.entry((t.agent.clone(), t.session)).or_default().push(t.latency_s);
    }
    if by.is_empty() {
        return Ok(());
    }
    let mut csv = String::from("agent,session,mean_latency_s,sd\n");
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((agent, session), vals) in &by {
        let m = mean(vals);
        writeln!(
            csv,
            "{agent},{session},{m:.6},{:.6}",
            if vals.len() > 1 { sd(vals) } else { 0.0 }
        )
        .unwrap();
        series.entry(agent.clone()).or_default().push((*session as f64, m));
    }
    std::fs::write(out.join("latency_by_session.csv"), csv)?;
    let series: Vec<LineSeries> = series
        .into_iter()
        .map(|(label, points)| LineSeries { label, points })
        .collect();
    let svg = line_plot("Training latency", "session", "latency (s)", &series, None);
    std::fs::write(out.join("latency_by_session.svg"), svg)?;
    Ok(())
}

/// Savings (trial 1 minus trial 2 latency) per session and agent.
fn savings_figure(tables: &ExperimentTables, out: &Path) -> Result<(), ConfigError> {
    let mut lat: BTreeMap<(String, u64, usize), [Option<f64>; 2]> = BTreeMap::new();
    for t in tables.trials.iter().filter(|t| t.phase == "train" && !t.probe) {
        if t.trial == 1 || t.trial == 2 {
            let slot = lat.entry((t.agent.clone(), t.seed, t.session)).or_default();
            slot[t.trial - 1] = Some(t.latency_s);
        }
    }
    let mut by_agent_session: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for ((agent, _seed, session), pair) in &lat {
        if let [Some(t1), Some(t2)] = pair {
            by_agent_session
                .entry((agent.clone(), *session))
                .or_default()
                .push(t1 - t2);
        }
    }
    if by_agent_session.is_empty() {
        return Ok(());
    }
    let mut csv = String::from("agent,session,mean_savings_s,sd\n");
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((agent, session), vals) in &by_agent_session {
        let m = mean(vals);
        writeln!(
            csv,
            "{agent},{session},{m:.6},{:.6}",
            if vals.len() > 1 { sd(vals) } else { 0.0 }
        )
        .unwrap();
        series.entry(agent.clone()).or_default().push((*session as f64, m));
    }
    std::fs::write(out.join("savings_by_session.csv"), csv)?;
    let series: Vec<LineSeries> = series
        .into_iter()
        .map(|(label, points)| LineSeries { label, points })
        .collect();
    let svg = line_plot(
        "Savings (trial 1 - trial 2)",
        "session",
        "savings (s)",
        &series,
        Some((0.0, "none")),
    );
    std::fs::write(out.join("savings_by_session.svg"), svg)?;
    Ok(())
}

/// Mean probe visit ratio per agent and phase, with the 16.7% chance line.
fn visit_ratio_figure(tables: &ExperimentTables, out: &Path) -> Result<(), ConfigError> {
    // Per-seed means first, then across seeds.
    let mut per_seed: BTreeMap<(String, String, u64), (f64, f64)> = BTreeMap::new();
    for p in &tables.probes {
        let e = per_seed
            .entry((p.agent.clone(), p.phase.clone(), p.seed))
            .or_insert((0.0, 0.0));
        e.0 += p.time_correct_s;
        e.1 += p.time_any_s;
    }
    let mut grouped: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for ((agent, phase, _), (correct, any)) in &per_seed {
        if let Some(r) = visit_ratio(*correct, *any) {
            grouped.entry((agent.clone(), phase.clone())).or_default().push(r);
        }
    }
    if grouped.is_empty() {
        return Ok(());
    }
    let mut csv = String::from("agent,phase,n,mean_visit_ratio,ci95_half_width,t_vs_chance,p\n");
    let mut bars = Vec::new();
    let mut group_ids: BTreeMap<String, usize> = BTreeMap::new();
    for ((agent, phase), vals) in &grouped {
        let next = group_ids.len();
        let group = *group_ids.entry(agent.clone()).or_insert(next);
        if vals.len() >= 2 {
            let s = stats(vals, CHANCE_SIX);
            writeln!(
                csv,
                "{agent},{phase},{},{:.6},{:.6},{:.4},{:.6}",
                s.n, s.mean, s.ci95_half_width, s.t_vs_chance, s.p_greater
            )
            .unwrap();
            bars.push(Bar {
                label: format!("{agent}/{phase}"),
                value: s.mean,
                err: Some(s.ci95_half_width),
                group,
            });
        } else {
            writeln!(csv, "{agent},{phase},{},{:.6},,,", vals.len(), mean(vals)).unwrap();
            bars.push(Bar {
                label: format!("{agent}/{phase}"),
                value: mean(vals),
                err: None,
                group,
            });
        }
    }
    std::fs::write(out.join("visit_ratios.csv"), csv)?;
    let svg = bar_plot("Probe visit ratios", "visit ratio", &bars, Some((CHANCE_SIX, "chance")));
    std::fs::write(out.join("visit_ratios.svg"), svg)?;
    Ok(())
}

/// Gate policy during versus after the cue window.
fn gate_figure(tables: &ExperimentTables, out: &Path) -> Result<(), ConfigError> {
    if tables.gate_probes.is_empty() {
        return Ok(());
    }
    let mut grouped: BTreeMap<(String, String, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for g in &tables.gate_probes {
        let e = grouped
            .entry((g.agent.clone(), g.phase.clone(), g.session))
            .or_default();
        e.0.push(g.p_update_cue_window);
        e.1.push(g.p_update_post_cue);
    }
    let mut csv =
        String::from("agent,phase,session,mean_p_update_cue,mean_p_update_post\n");
    let mut bars = Vec::new();
    for ((agent, phase, session), (cue, post)) in &grouped {
        writeln!(csv, "{agent},{phase},{session},{:.6},{:.6}", mean(cue), mean(post)).unwrap();
        bars.push(Bar {
            label: format!("{phase}/s{session} cue"),
            value: mean(cue),
            err: None,
            group: 0,
        });
        bars.push(Bar {
            label: format!("{phase}/s{session} post"),
            value: mean(post),
            err: None,
            group: 1,
        });
    }
    std::fs::write(out.join("gate_policy.csv"), csv)?;
    let svg = bar_plot("P(update) by window", "P(update)", &bars, Some((0.5, "untrained")));
    std::fs::write(out.join("gate_policy.svg"), svg)?;
    Ok(())
}

/// Capacity curves, if a capacity.csv (arch,rule,n_units,seed,n_assoc,mse)
/// sits in the run directory.
fn capacity_figure(run_dir: &Path, out: &Path) -> Result<(), ConfigError> {
    let path = run_dir.join("capacity.csv");
    if !path.exists() {
        return Ok(());
    }
    let text = std::fs::read_to_string(&path)?;
    let mut grouped: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            continue;
        }
        let key = format!("{}-{}-{}", f[0], f[1], f[2]);
        let n_assoc: usize = f[4].parse().unwrap_or(0);
        let mse: f64 = f[5].parse().unwrap_or(f64::NAN);
        grouped.entry((key, n_assoc)).or_default().push(mse);
    }
    if grouped.is_empty() {
        return Ok(());
    }
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((key, n_assoc), mses) in &grouped {
        series.entry(key.clone()).or_default().push((*n_assoc as f64, mean(mses)));
    }
    let series: Vec<LineSeries> = series
        .into_iter()
        .map(|(label, points)| LineSeries { label, points })
        .collect();
    let svg = line_plot("One-shot recall", "associations stored", "recall MSE", &series, None);
    std::fs::write(out.join("capacity.svg"), svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rows::{ProbeRow, TrialRow};

    fn tables() -> ExperimentTables {
        let mut t = ExperimentTables::default();
        for seed in 0..3u64 {
            for session in 1..=2usize {
                for trial in 1..=4usize {
                    t.trials.push(TrialRow {
                        experiment: "e".into(),
                        agent: "symbolic".into(),
                        seed,
                        phase: "train".into(),
                        session,
                        trial,
                        cue: 1,
                        probe: false,
                        latency_s: 100.0 / trial as f64 + seed as f64,
                        rewarded: true,
                        time_at_goal_s: 2.0,
                        path_length_m: 10.0,
                    });
                }
            }
            t.probes.push(ProbeRow {
                experiment: "e".into(),
                agent: "symbolic".into(),
                seed,
                phase: "2npa".into(),
                session: 1,
                cue: 7,
                time_correct_s: 20.0 + seed as f64,
                time_any_s: 25.0,
                visit_ratio: Some((20.0 + seed as f64) / 25.0),
            });
        }
        t
    }

    #[test]
    fn report_generates_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = tables();
        t.sort();
        t.write_csv_files(dir.path()).unwrap();
        generate_report(dir.path()).unwrap();
        for f in [
            "report/latency_by_session.csv",
            "report/latency_by_session.svg",
            "report/savings_by_session.csv",
            "report/visit_ratios.csv",
            "report/visit_ratios.svg",
        ] {
            assert!(dir.path().join(f).exists(), "missing {f}");
        }
        let csv =
            std::fs::read_to_string(dir.path().join("report/visit_ratios.csv")).unwrap();
        assert!(csv.contains("symbolic,2npa,3"));

        // Regenerating produces identical bytes.
        let svg1 =
            std::fs::read(dir.path().join("report/visit_ratios.svg")).unwrap();
        generate_report(dir.path()).unwrap();
        let svg2 =
            std::fs::read(dir.path().join("report/visit_ratios.svg")).unwrap();
        assert_eq!(svg1, svg2);
    }

    #[test]
    fn empty_run_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        ExperimentTables::default().write_csv_files(dir.path()).unwrap();
        assert!(generate_report(dir.path()).is_err());
    }
}
