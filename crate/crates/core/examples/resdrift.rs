//! Dev diagnostic: reservoir pattern stability under a clamped cue.

use schema_nav_core::reservoir::Reservoir;
use schema_nav_core::rng::{stream, stream_rng};

fn main() {
    for n in [128usize, 1024] {
        let mut structure = stream_rng(7, stream::STRUCTURE);
        let mut res = Reservoir::new(n, 20, &mut structure);
        let mut noise = stream_rng(7, stream::GOAL);
        let mut cue = vec![0.0; 20];
        cue[3] = 3.0;
        // Settle 2 s, then sample rates over 5 s.
        for _ in 0..100 { res.step(&cue, &mut noise); }
        let a = res.rates.clone();
        let mut mean = vec![0.0; n];
        let mut count = 0.0;
        for _ in 0..250 {
            res.step(&cue, &mut noise);
            for (m, &r) in mean.iter_mut().zip(res.rates.iter()) { *m += r; }
            count += 1.0;
        }
        for m in mean.iter_mut() { *m /= count; }
        let b = res.rates.clone();
        // Reset (recall phase) and settle again.
        res.reset(0.316, &mut noise);
        for _ in 0..100 { res.step(&cue, &mut noise); }
        let c = res.rates.clone();
        let cos = |x: &[f64], y: &[f64]| {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            dot / (nx * ny)
        };
        let active = a.iter().filter(|&&r| r > 0.0).count();
        println!(
            "N={n}: active={active} ({:.2}) | cos(start,end of window)={:.3} cos(mean,end)={:.3} cos(mean,after reset)={:.3}",
            active as f64 / n as f64, cos(&a, &b), cos(&mean, &b), cos(&mean, &c)
        );
    }
}
