//! Behavioral metrics and the small statistics toolbox used by reports and
//! the acceptance suite.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Probe visit ratio: time near the correct goal over time near any
/// candidate goal. `None` when the agent never came near any goal.
pub fn visit_ratio(time_correct: f64, time_any: f64) -> Option<f64> {
    if time_any <= 0.0 {
        None
    } else {
        Some(time_correct / time_any)
    }
}

/// Savings within a session: latency(trial 1) - latency(trial 2).
pub fn savings(session_latencies: &[f64]) -> f64 {
    assert!(session_latencies.len() >= 2, "savings needs at least two trials");
    session_latencies[0] - session_latencies[1]
}

/// Count of paired associations learned: per-pair visit ratio above the
/// 1-in-6 chance level.
pub fn pas_learned(pair_ratios: &[Option<f64>], chance: f64) -> usize {
    pair_ratios.iter().filter(|r| matches!(r, Some(v) if *v > chance)).count()
}

/// Mean and normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StatSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci95_half_width: f64,
    /// One-sample t statistic against the chance level.
    pub t_vs_chance: f64,
    /// One-sided p-value for mean > chance.
    pub p_greater: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
        / (values.len() as f64 - 1.0);
    var.sqrt()
}

/// One-sample summary against a chance level.
pub fn stats(values: &[f64], chance: f64) -> StatSummary {
    assert!(values.len() >= 2, "stats needs at least two values");
    let n = values.len();
    let m = mean(values);
    let s = sd(values);
    let se = s / (n as f64).sqrt();
    let t = if se > 0.0 { (m - chance) / se } else { 0.0 };
    let p = if se > 0.0 {
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).unwrap();
        1.0 - dist.cdf(t)
    } else if m > chance {
        0.0
    } else {
        1.0
    };
    StatSummary { n, mean: m, sd: s, ci95_half_width: 1.96 * se, t_vs_chance: t, p_greater: p }
}

/// Paired one-sided t-test that `a` exceeds `b`.
pub fn paired_t_greater(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let diffs: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let s = stats(&diffs, 0.0);
    (s.t_vs_chance, s.p_greater)
}

/// Exact one-sided sign test: p-value for observing at least `wins`
/// successes out of `n` under a fair coin.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    assert!(wins <= n);
    let mut p = 0.0;
    for k in wins..=n {
        p += binomial(n, k);
    }
    p / 2f64.powi(n as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Mean squared element-wise difference between two flat weight dumps.
pub fn weight_change(before: &[f64], after: &[f64]) -> f64 {
    assert_eq!(before.len(), after.len(), "snapshot shapes must match");
    if before.is_empty() {
        return 0.0;
    }
    before
        .iter()
        .zip(after.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / before.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn visit_ratio_conventions() {
        assert_eq!(visit_ratio(60.0, 60.0), Some(1.0));
        assert_relative_eq!(visit_ratio(10.0, 60.0).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert_eq!(visit_ratio(0.0, 0.0), None);
    }

    #[test]
    fn savings_arithmetic() {
        assert_eq!(savings(&[100.0, 40.0, 10.0, 10.0]), 60.0);
        assert_eq!(savings(&[40.0, 40.0]), 0.0);
    }

    #[test]
    fn pas_learned_counting() {
        let chance = 1.0 / 6.0;
        let perfect: Vec<Option<f64>> = vec![Some(1.0); 12];
        assert_eq!(pas_learned(&perfect, chance), 12);
        // Uniform visiting of 12 goals puts each pair at 1/12 < 1/6.
        let uniform: Vec<Option<f64>> = vec![Some(1.0 / 12.0); 12];
        assert_eq!(pas_learned(&uniform, chance), 0);
        let mixed: Vec<Option<f64>> = vec![Some(0.5), None, Some(0.1), Some(0.2)];
        assert_eq!(pas_learned(&mixed, chance), 2);
    }

    #[test]
    fn stats_textbook_case() {
        // Constant values at chance: t = 0.
        let s = stats(&[0.167; 5], 0.167);
        assert_eq!(s.t_vs_chance, 0.0);

        // 24 values of 0.5 with tiny jitter against chance 0.167: t large,
        // CI excludes chance. Oracle: t = (mean - chance) / (sd / sqrt(n)).
        let values: Vec<f64> = (0..24).map(|i| 0.5 + 0.001 * (i % 3) as f64).collect();
        let s = stats(&values, 0.167);
        let m = mean(&values);
        let expect_t = (m - 0.167) / (sd(&values) / 24f64.sqrt());
        assert_relative_eq!(s.t_vs_chance, expect_t, epsilon = 1e-12);
        assert!(s.t_vs_chance > 100.0);
        assert!(s.p_greater < 1e-6);
        assert!(m - s.ci95_half_width > 0.167);
        assert_relative_eq!(s.ci95_half_width, 1.96 * sd(&values) / 24f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn paired_t_detects_direction() {
        let a: Vec<f64> = (0..10).map(|i| 1.0 + 0.01 * i as f64).collect();
        let b: Vec<f64> = (0..10).map(|i| 0.5 + 0.01 * i as f64).collect();
        let (t, p) = paired_t_greater(&a, &b);
        assert!(t > 10.0);
        assert!(p < 0.001);
        let (_, p_rev) = paired_t_greater(&b, &a);
        assert!(p_rev > 0.99);
    }

    #[test]
    fn sign_test_small_cases() {
        // 10 wins out of 10: p = 1/1024.
        assert_relative_eq!(sign_test_p(10, 10), 1.0 / 1024.0, epsilon = 1e-12);
        // 9 of 10: p = 11/1024 < 0.05; 8 of 10 is not significant.
        assert_relative_eq!(sign_test_p(9, 10), 11.0 / 1024.0, epsilon = 1e-12);
        assert!(sign_test_p(8, 10) > 0.05);
        assert_relative_eq!(sign_test_p(0, 4), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_oracles() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 7.0).collect();
        assert_relative_eq!(pearson(&xs, &ys), 1.0, epsilon = 1e-12);
        let ys_neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_relative_eq!(spearman(&xs, &ys_neg), -1.0, epsilon = 1e-12);
        // Monotone nonlinear map still gives Spearman 1.
        let ys_mono: Vec<f64> = xs.iter().map(|x| x.powi(3) - 100.0).collect();
        assert_relative_eq!(spearman(&xs, &ys_mono), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn weight_change_examples() {
        let a = vec![1.0, 2.0, 3.0];
        assert_eq!(weight_change(&a, &a), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        assert_relative_eq!(weight_change(&a, &b), 0.25, epsilon = 1e-12);
    }
}
