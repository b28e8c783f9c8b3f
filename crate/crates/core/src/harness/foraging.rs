//! Random-foraging protocol: the coordinate map learns from a noise-driven
//! ring-attractor walk, then is scored against the true trajectory.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::agents::DT_S;
use crate::environment::{step_position, Arena, PlaceCellField, Wall, N_PLACE_CELLS};
use crate::harness::metrics::pearson;
use crate::metric_map::{pi_td_error, CoordinateMap};
use crate::reservoir::ActorRing;
use crate::rng::{stream, stream_rng};

/// Results of one foraging run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForagingOutcome {
    /// Mean |path-integration error| per training trial.
    pub per_trial_mean_abs_delta: Vec<f64>,
    /// Pearson correlation of estimated vs true coordinates on a held-out
    /// walk, per axis.
    pub corr_x: f64,
    pub corr_y: f64,
    /// The learned place-to-coordinate weights (2 x 49 row-major).
    pub w_coord: Vec<f64>,
    /// Mean realized speed during the held-out walk (m/s).
    pub mean_speed: f64,
}

/// Run the foraging protocol: `trials` trials of `trial_s` seconds each of
/// ring-noise exploration with coordinate plasticity on, then one held-out
/// evaluation walk with plasticity off.
pub fn run_foraging(trials: usize, trial_s: f64, seed: u64) -> ForagingOutcome {
    let arena = Arena::open();
    let field = PlaceCellField::standard();
    let mut coord = CoordinateMap::new(N_PLACE_CELLS);
    let mut actor = ActorRing::new(0);
    let mut rng_actor = stream_rng(seed, stream::ACTOR);
    let mut rng_coord = stream_rng(seed, stream::COORD);
    let mut rng_sched = stream_rng(seed, stream::SCHEDULE);

    let steps_per_trial = (trial_s / DT_S) as usize;
    let zeros40 = vec![0.0; crate::reservoir::N_ACTOR];
    let mut pc = vec![0.0; N_PLACE_CELLS];
    let mut per_trial = Vec::with_capacity(trials);

    let mut walk =
        |coord: &mut CoordinateMap,
         actor: &mut ActorRing,
         rng_actor: &mut rand_chacha::ChaCha12Rng,
         rng_coord: &mut rand_chacha::ChaCha12Rng,
         rng_sched: &mut rand_chacha::ChaCha12Rng,
         steps: usize,
         learn: bool,
         collect: Option<&mut (Vec<[f64; 2]>, Vec<[f64; 2]>)>| {
            let start = *Wall::ALL.choose(rng_sched).unwrap();
            let mut s = start.start_position();
            coord.reset();
            actor.reset();
            let mut a_hat = [0.0, 0.0];
            let mut abs_delta = 0.0;
            let mut dist = 0.0;
            let mut collected = collect;
            for step in 0..steps {
                field.activity(s, &mut pc);
                let p_prev = coord.p;
                coord.coord_step(&pc, rng_coord);
                let delta = pi_td_error(coord.p, p_prev, a_hat);
                abs_delta += (delta[0].abs() + delta[1].abs()) / 2.0;
                // Skip the reset re-anchoring transient, as the agents do.
                if learn && step > 50 {
                    coord.trace_step(&pc);
                    coord.update(delta);
                }
                actor.step(&[], &[], &zeros40, 0.0, rng_actor);
                let a = actor.action();
                let velocity = [a[0] / DT_S, a[1] / DT_S];
                let (s_next, realized) = step_position(s, velocity, DT_S, &arena);
                a_hat = realized;
                dist += (realized[0] * realized[0] + realized[1] * realized[1]).sqrt();
                s = s_next;
                if let Some((ps, ss)) = collected.as_deref_mut() {
                    // Skip the first second while the estimate re-anchors.
                    if step > 50 {
                        ps.push(coord.p);
                        ss.push(s);
                    }
                }
            }
            (abs_delta / steps as f64, dist / (steps as f64 * DT_S))
        };

    for _ in 0..trials {
        let (mean_abs, _) = walk(
            &mut coord,
            &mut actor,
            &mut rng_actor,
            &mut rng_coord,
            &mut rng_sched,
            steps_per_trial,
            true,
            None,
        );
        per_trial.push(mean_abs);
    }

    // Held-out evaluation walk, plasticity off.
    let mut pairs = (Vec::new(), Vec::new());
    let (_, mean_speed) = walk(
        &mut coord,
        &mut actor,
        &mut rng_actor,
        &mut rng_coord,
        &mut rng_sched,
        (60.0 / DT_S) as usize,
        false,
        Some(&mut pairs),
    );

    let (est, truth) = pairs;
    let ex: Vec<f64> = est.iter().map(|p| p[0]).collect();
    let ey: Vec<f64> = est.iter().map(|p| p[1]).collect();
    let tx: Vec<f64> = truth.iter().map(|p| p[0]).collect();
    let ty: Vec<f64> = truth.iter().map(|p| p[1]).collect();

    ForagingOutcome {
        per_trial_mean_abs_delta: per_trial,
        corr_x: pearson(&ex, &tx),
        corr_y: pearson(&ey, &ty),
        w_coord: coord.w_coord.data.clone(),
        mean_speed,
    }
}

/// The coordinate response along a line: the fixed-point readout
/// `W . pc(s)` sampled at `n` points along y = 0, returning the x-cell
/// response (used for the monotonicity check).
pub fn x_response_along_axis(w_coord: &[f64], n: usize) -> Vec<f64> {
    let field = PlaceCellField::standard();
    let mut pc = vec![0.0; N_PLACE_CELLS];
    (0..n)
        .map(|i| {
            let x = -0.8 + 1.6 * i as f64 / (n - 1) as f64;
            field.activity([x, 0.0], &mut pc);
            pc.iter().zip(w_coord[..N_PLACE_CELLS].iter()).map(|(u, w)| u * w).sum()
        })
        .collect()
}
