//! Vector navigation: the symbolic subtraction-plus-softmax controller with
//! recall-gated suppression, and a small feedforward network trained by
//! backpropagation to mimic it, then frozen for task use.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, TrainError};
use crate::linalg::Mat;
use crate::reservoir::N_ACTOR;
use crate::rng::{stream, stream_rng};

/// Recall threshold below which navigation output is suppressed.
pub const RECALL_THRESHOLD: f64 = 0.6;

/// Direction matrix shared with the actor ring: row i is the unit vector
/// [sin theta_i, cos theta_i] with theta_i = 2 pi i / 40.
fn action_directions() -> Vec<[f64; 2]> {
    (0..N_ACTOR)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / N_ACTOR as f64;
            [theta.sin(), theta.cos()]
        })
        .collect()
}

/// `d = g - p`, componentwise.
#[inline]
pub fn goal_vector(g: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    [g[0] - p[0], g[1] - p[1]]
}

/// The symbolic controller.
#[derive(Debug, Clone)]
pub struct SymbolicNavigator {
    directions: Vec<[f64; 2]>,
    pub threshold: f64,
}

impl SymbolicNavigator {
    pub fn new() -> Self {
        Self { directions: action_directions(), threshold: RECALL_THRESHOLD }
    }

    /// Softmax over direction alignments, gated to exactly zero when the
    /// recall value does not clear the threshold. The softmax has no
    /// temperature: |d| itself sharpens the distribution.
    pub fn output(&self, d: [f64; 2], recall: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), N_ACTOR);
        if recall <= self.threshold {
            out.fill(0.0);
            return;
        }
        let mut max = f64::NEG_INFINITY;
        for (o, dir) in out.iter_mut().zip(self.directions.iter()) {
            *o = dir[0] * d[0] + dir[1] * d[1];
            if *o > max {
                max = *o;
            }
        }
        let mut denom = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            denom += *o;
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
    }
}

impl Default for SymbolicNavigator {
    fn default() -> Self {
        Self::new()
    }
}

/// Training rows: inputs (p, g, recall) and the symbolic controller's
/// 40-long output as the label.
#[derive(Debug, Clone)]
pub struct NavDataset {
    pub inputs: Vec<[f64; 5]>,
    pub labels: Vec<[f64; N_ACTOR]>,
}

impl NavDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Draw `n` rows: p, g uniform over the arena square, recall uniform over
/// [0, 1.2], labels regenerated through the symbolic navigator.
pub fn generate_nav_dataset(n: usize, rng: &mut ChaCha12Rng) -> NavDataset {
    assert!(n > 0);
    let nav = SymbolicNavigator::new();
    let mut inputs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut row = [0.0; N_ACTOR];
    for _ in 0..n {
        let p = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let g = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let recall = rng.gen_range(0.0..1.2);
        nav.output(goal_vector(g, p), recall, &mut row);
        inputs.push([p[0], p[1], g[0], g[1], recall]);
        labels.push(row);
    }
    NavDataset { inputs, labels }
}

/// One dense layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dense {
    /// out x in weights.
    pub w: Mat,
    pub b: Vec<f64>,
}

impl Dense {
    fn glorot(n_out: usize, n_in: usize, rng: &mut ChaCha12Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        Self {
            w: Mat::from_fn(n_out, n_in, |_, _| rng.gen_range(-limit..limit)),
            b: vec![0.0; n_out],
        }
    }

    fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip((0..self.w.rows).map(|r| self.w.row(r)).zip(self.b.iter()))
        {
            let mut acc = *b;
            for (w, u) in row.iter().zip(input.iter()) {
                acc += w * u;
            }
            *o = acc;
        }
    }
}

/// Frozen navigation network: 5 inputs -> 128 -> 128 (rectified) -> 40
/// linear outputs. Weights never change during task learning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavNet {
    pub layers: Vec<Dense>,
    pub metrics: NavTrainMetrics,
}

/// Held-out quality numbers recorded at training time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NavTrainMetrics {
    pub train_mse: f64,
    pub held_out_mse: f64,
    /// Argmax agreement with the symbolic controller on unsuppressed rows.
    pub argmax_agreement: f64,
    /// Largest absolute output over suppressed held-out rows.
    pub suppressed_max_abs: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// Training hyperparameters; the distillation shapes (two 128 hidden
/// layers) are fixed, everything else is configurable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavTrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    /// Multiplicative learning-rate decay applied each epoch.
    pub lr_decay: f64,
    pub optimizer: NavOptimizer,
    pub hidden: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavOptimizer {
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for NavTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 400,
            batch: 128,
            lr: 2e-3,
            lr_decay: 0.995,
            optimizer: NavOptimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 },
            hidden: 128,
            seed: 0,
        }
    }
}

struct Scratch {
    h1: Vec<f64>,
    a1: Vec<f64>,
    h2: Vec<f64>,
    a2: Vec<f64>,
    out: Vec<f64>,
    d_out: Vec<f64>,
    d_a2: Vec<f64>,
    d_a1: Vec<f64>,
}

impl Scratch {
    fn new(hidden: usize) -> Self {
        Self {
            h1: vec![0.0; hidden],
            a1: vec![0.0; hidden],
            h2: vec![0.0; hidden],
            a2: vec![0.0; hidden],
            out: vec![0.0; N_ACTOR],
            d_out: vec![0.0; N_ACTOR],
            d_a2: vec![0.0; hidden],
            d_a1: vec![0.0; hidden],
        }
    }
}

struct Grads {
    layers: Vec<(Mat, Vec<f64>)>,
}

impl Grads {
    fn like(net: &NavNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (Mat::zeros(l.w.rows, l.w.cols), vec![0.0; l.b.len()]))
                .collect(),
        }
    }

    fn zero(&mut self) {
        for (w, b) in self.layers.iter_mut() {
            w.data.fill(0.0);
            b.fill(0.0);
        }
    }
}

impl NavNet {
    fn with_shapes(hidden: usize, rng: &mut ChaCha12Rng) -> Self {
        Self {
            layers: vec![
                Dense::glorot(hidden, 5, rng),
                Dense::glorot(hidden, hidden, rng),
                Dense::glorot(N_ACTOR, hidden, rng),
            ],
            metrics: NavTrainMetrics::default(),
        }
    }

    /// Deterministic forward pass.
    pub fn forward(&self, p: [f64; 2], g: [f64; 2], recall: f64, out: &mut [f64]) {
        let input = [p[0], p[1], g[0], g[1], recall];
        let hidden = self.layers[0].w.rows;
        let mut a1 = vec![0.0; hidden];
        let mut a2 = vec![0.0; hidden];
        self.layers[0].forward(&input, &mut a1);
        for x in a1.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        self.layers[1].forward(&a1, &mut a2);
        for x in a2.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        self.layers[2].forward(&a2, out);
    }

    /// Forward keeping pre-activations, used by backprop.
    fn forward_train(&self, input: &[f64; 5], s: &mut Scratch) {
        self.layers[0].forward(input, &mut s.h1);
        for (a, &h) in s.a1.iter_mut().zip(s.h1.iter()) {
            *a = if h > 0.0 { h } else { 0.0 };
        }
        self.layers[1].forward(&s.a1, &mut s.h2);
        for (a, &h) in s.a2.iter_mut().zip(s.h2.iter()) {
            *a = if h > 0.0 { h } else { 0.0 };
        }
        self.layers[2].forward(&s.a2, &mut s.out);
    }

    /// Accumulate gradients of the summed squared error over one sample.
    fn backward(&self, input: &[f64; 5], label: &[f64; N_ACTOR], s: &mut Scratch, g: &mut Grads) {
        for i in 0..N_ACTOR {
            s.d_out[i] = 2.0 * (s.out[i] - label[i]);
        }
        // Output layer.
        let hidden = s.a2.len();
        for r in 0..N_ACTOR {
            let go = s.d_out[r];
            if go != 0.0 {
                let row = g.layers[2].0.row_mut(r);
                for c in 0..hidden {
                    row[c] += go * s.a2[c];
                }
                g.layers[2].1[r] += go;
            }
        }
        for c in 0..hidden {
            let mut acc = 0.0;
            for r in 0..N_ACTOR {
                acc += self.layers[2].w.get(r, c) * s.d_out[r];
            }
            s.d_a2[c] = if s.h2[c] > 0.0 { acc } else { 0.0 };
        }
        // Second hidden layer.
        for r in 0..hidden {
            let go = s.d_a2[r];
            if go != 0.0 {
                let row = g.layers[1].0.row_mut(r);
                for c in 0..hidden {
                    row[c] += go * s.a1[c];
                }
                g.layers[1].1[r] += go;
            }
        }
        for c in 0..hidden {
            let mut acc = 0.0;
            for r in 0..hidden {
                acc += self.layers[1].w.get(r, c) * s.d_a2[r];
            }
            s.d_a1[c] = if s.h1[c] > 0.0 { acc } else { 0.0 };
        }
        // Input layer.
        for r in 0..hidden {
            let go = s.d_a1[r];
            if go != 0.0 {
                let row = g.layers[0].0.row_mut(r);
                for c in 0..5 {
                    row[c] += go * input[c];
                }
                g.layers[0].1[r] += go;
            }
        }
    }
}

/// Optimizer state mirroring the parameter shapes.
struct OptState {
    m: Vec<(Mat, Vec<f64>)>,
    v: Vec<(Mat, Vec<f64>)>,
    t: usize,
}

fn apply_update(
    net: &mut NavNet,
    grads: &Grads,
    opt: &NavOptimizer,
    state: &mut OptState,
    lr: f64,
    batch: usize,
) {
    let scale = 1.0 / batch as f64;
    state.t += 1;
    match *opt {
        NavOptimizer::Sgd { momentum } => {
            for (li, layer) in net.layers.iter_mut().enumerate() {
                let (gw, gb) = &grads.layers[li];
                let (mw, mb) = &mut state.m[li];
                for i in 0..layer.w.data.len() {
                    mw.data[i] = momentum * mw.data[i] + gw.data[i] * scale;
                    layer.w.data[i] -= lr * mw.data[i];
                }
                for i in 0..layer.b.len() {
                    mb[i] = momentum * mb[i] + gb[i] * scale;
                    layer.b[i] -= lr * mb[i];
                }
            }
        }
        NavOptimizer::Adam { beta1, beta2, eps } => {
            let bc1 = 1.0 - beta1.powi(state.t as i32);
            let bc2 = 1.0 - beta2.powi(state.t as i32);
            for (li, layer) in net.layers.iter_mut().enumerate() {
                let (gw, gb) = &grads.layers[li];
                let (mw, mb) = &mut state.m[li];
                let (vw, vb) = &mut state.v[li];
                for i in 0..layer.w.data.len() {
                    let g = gw.data[i] * scale;
                    mw.data[i] = beta1 * mw.data[i] + (1.0 - beta1) * g;
                    vw.data[i] = beta2 * vw.data[i] + (1.0 - beta2) * g * g;
                    let mhat = mw.data[i] / bc1;
                    let vhat = vw.data[i] / bc2;
                    layer.w.data[i] -= lr * mhat / (vhat.sqrt() + eps);
                }
                for i in 0..layer.b.len() {
                    let g = gb[i] * scale;
                    mb[i] = beta1 * mb[i] + (1.0 - beta1) * g;
                    vb[i] = beta2 * vb[i] + (1.0 - beta2) * g * g;
                    let mhat = mb[i] / bc1;
                    let vhat = vb[i] / bc2;
                    layer.b[i] -= lr * mhat / (vhat.sqrt() + eps);
                }
            }
        }
    }
}

/// Train the distillation network on an 80/20 split of the dataset and
/// freeze it with held-out metrics attached.
pub fn train_nav_net(dataset: &NavDataset, config: &NavTrainConfig) -> Result<NavNet, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut rng = stream_rng(config.seed, stream::NAV_TRAIN);
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let split = n * 4 / 5;
    let (train_idx, held_idx) = order.split_at(split.max(1));

    let mut net = NavNet::with_shapes(config.hidden, &mut rng);
    let mut scratch = Scratch::new(config.hidden);
    let mut grads = Grads::like(&net);
    let mut opt_state = OptState {
        m: net
            .layers
            .iter()
            .map(|l| (Mat::zeros(l.w.rows, l.w.cols), vec![0.0; l.b.len()]))
            .collect(),
        v: net
            .layers
            .iter()
            .map(|l| (Mat::zeros(l.w.rows, l.w.cols), vec![0.0; l.b.len()]))
            .collect(),
        t: 0,
    };

    let mut epoch_order: Vec<usize> = train_idx.to_vec();
    let mut lr = config.lr;
    let mut last_train_mse = f64::INFINITY;
    for epoch in 0..config.epochs {
        epoch_order.shuffle(&mut rng);
        let mut sq_sum = 0.0;
        let mut count = 0usize;
        for chunk in epoch_order.chunks(config.batch) {
            grads.zero();
            for &idx in chunk {
                net.forward_train(&dataset.inputs[idx], &mut scratch);
                for (o, l) in scratch.out.iter().zip(dataset.labels[idx].iter()) {
                    sq_sum += (o - l) * (o - l);
                }
                count += N_ACTOR;
                net.backward(&dataset.inputs[idx], &dataset.labels[idx], &mut scratch, &mut grads);
            }
            apply_update(&mut net, &grads, &config.optimizer, &mut opt_state, lr, chunk.len());
        }
        last_train_mse = sq_sum / count as f64;
        if !last_train_mse.is_finite() {
            return Err(TrainError::Diverged { epoch, loss: last_train_mse });
        }
        lr *= config.lr_decay;
    }

    let eval = evaluate_nav_net(&net, dataset, held_idx);
    net.metrics = NavTrainMetrics {
        train_mse: last_train_mse,
        held_out_mse: eval.mse,
        argmax_agreement: eval.argmax_agreement,
        suppressed_max_abs: eval.suppressed_max_abs,
        epochs: config.epochs,
        seed: config.seed,
    };
    Ok(net)
}

/// Evaluation summary on a row subset.
#[derive(Debug, Clone, Copy)]
pub struct NavEval {
    pub mse: f64,
    pub argmax_agreement: f64,
    pub suppressed_max_abs: f64,
    pub unsuppressed_rows: usize,
    pub suppressed_rows: usize,
}

pub fn evaluate_nav_net(net: &NavNet, dataset: &NavDataset, indices: &[usize]) -> NavEval {
    let mut out = vec![0.0; N_ACTOR];
    let mut sq_sum = 0.0;
    let mut agree = 0usize;
    let mut unsup = 0usize;
    let mut sup = 0usize;
    let mut sup_max: f64 = 0.0;
    for &idx in indices {
        let inp = dataset.inputs[idx];
        let label = &dataset.labels[idx];
        net.forward([inp[0], inp[1]], [inp[2], inp[3]], inp[4], &mut out);
        for (o, l) in out.iter().zip(label.iter()) {
            sq_sum += (o - l) * (o - l);
        }
        let suppressed = label.iter().all(|&l| l == 0.0);
        if suppressed {
            sup += 1;
            for &o in &out {
                sup_max = sup_max.max(o.abs());
            }
        } else {
            unsup += 1;
            let net_arg = argmax(&out);
            let lab_arg = argmax(label);
            if net_arg == lab_arg {
                agree += 1;
            }
        }
    }
    NavEval {
        mse: sq_sum / (indices.len() * N_ACTOR) as f64,
        argmax_agreement: if unsup > 0 { agree as f64 / unsup as f64 } else { 1.0 },
        suppressed_max_abs: sup_max,
        unsuppressed_rows: unsup,
        suppressed_rows: sup,
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Serialize the frozen net as a small self-describing text bundle.
pub fn save_nav_net(net: &NavNet, path: &Path) -> Result<(), ConfigError> {
    let mut text = String::new();
    writeln!(text, "navnet,v1").unwrap();
    writeln!(
        text,
        "metrics,{:.8e},{:.8e},{:.6},{:.8e},{},{}",
        net.metrics.train_mse,
        net.metrics.held_out_mse,
        net.metrics.argmax_agreement,
        net.metrics.suppressed_max_abs,
        net.metrics.epochs,
        net.metrics.seed
    )
    .unwrap();
    for layer in &net.layers {
        writeln!(text, "layer,{},{}", layer.w.rows, layer.w.cols).unwrap();
        for r in 0..layer.w.rows {
            let row: Vec<String> = layer.w.row(r).iter().map(|w| format!("{w:.17e}")).collect();
            writeln!(text, "{}", row.join(",")).unwrap();
        }
        let b: Vec<String> = layer.b.iter().map(|w| format!("{w:.17e}")).collect();
        writeln!(text, "{}", b.join(",")).unwrap();
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_nav_net(path: &Path) -> Result<NavNet, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| ConfigError::Parse("empty navnet file".into()))?;
    if header != "navnet,v1" {
        return Err(ConfigError::Parse(format!("unexpected navnet header: {header}")));
    }
    let meta = lines.next().ok_or_else(|| ConfigError::Parse("missing metrics".into()))?;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 7 || parts[0] != "metrics" {
        return Err(ConfigError::Parse("bad metrics line".into()));
    }
    let metrics = NavTrainMetrics {
        train_mse: parts[1].parse().map_err(|_| ConfigError::Parse("train_mse".into()))?,
        held_out_mse: parts[2].parse().map_err(|_| ConfigError::Parse("held_out_mse".into()))?,
        argmax_agreement: parts[3].parse().map_err(|_| ConfigError::Parse("agreement".into()))?,
        suppressed_max_abs: parts[4].parse().map_err(|_| ConfigError::Parse("sup".into()))?,
        epochs: parts[5].parse().map_err(|_| ConfigError::Parse("epochs".into()))?,
        seed: parts[6].parse().map_err(|_| ConfigError::Parse("seed".into()))?,
    };
    let mut layers = Vec::new();
    while let Some(line) = lines.next() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 || parts[0] != "layer" {
            return Err(ConfigError::Parse(format!("expected layer line, got: {line}")));
        }
        let rows: usize = parts[1].parse().map_err(|_| ConfigError::Parse("rows".into()))?;
        let cols: usize = parts[2].parse().map_err(|_| ConfigError::Parse("cols".into()))?;
        let mut w = Mat::zeros(rows, cols);
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| ConfigError::Parse("truncated".into()))?;
            for (c, tok) in line.split(',').enumerate() {
                w.set(r, c, tok.parse().map_err(|_| ConfigError::Parse("weight".into()))?);
            }
        }
        let bline = lines.next().ok_or_else(|| ConfigError::Parse("missing bias".into()))?;
        let b: Result<Vec<f64>, _> = bline.split(',').map(str::parse::<f64>).collect();
        let b = b.map_err(|_| ConfigError::Parse("bias".into()))?;
        if b.len() != rows {
            return Err(ConfigError::Parse("bias length".into()));
        }
        layers.push(Dense { w, b });
    }
    if layers.len() != 3 {
        return Err(ConfigError::Parse(format!("expected 3 layers, got {}", layers.len())));
    }
    Ok(NavNet { layers, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn goal_vector_arithmetic() {
        assert_eq!(goal_vector([0.5, 0.0], [-0.5, 0.0]), [1.0, 0.0]);
        assert_eq!(goal_vector([0.2, 0.3], [0.2, 0.3]), [0.0, 0.0]);
        let a = goal_vector([0.1, -0.4], [0.7, 0.2]);
        let b = goal_vector([0.7, 0.2], [0.1, -0.4]);
        assert_eq!(a, [-b[0], -b[1]]);
    }

    #[test]
    fn nav_output_suppression_and_softmax() {
        let nav = SymbolicNavigator::new();
        let mut out = vec![0.0; N_ACTOR];
        nav.output([1.0, 0.0], 0.5, &mut out);
        assert!(out.iter().all(|&x| x == 0.0));

        nav.output([1.0, 0.0], 1.0, &mut out);
        let sum: f64 = out.iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        // Argmax direction closest to east: theta = pi/2 at k = 10.
        let arg = out
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(arg, 10);

        nav.output([0.0, 0.0], 1.0, &mut out);
        for &x in &out {
            assert_relative_eq!(x, 1.0 / 40.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nav_rotational_consistency() {
        let nav = SymbolicNavigator::new();
        let mut out = vec![0.0; N_ACTOR];
        let dtheta = 2.0 * std::f64::consts::PI / 40.0;
        for k in 0..40 {
            let theta = dtheta * (k as f64 + 0.1);
            nav.output([theta.sin(), theta.cos()], 1.0, &mut out);
            let arg = out
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(arg, k, "rotating d moves the argmax one index at a time");
        }
    }

    #[test]
    fn dataset_rows_sum_to_one_or_zero() {
        let mut rng = stream_rng(5, stream::NAV_DATA);
        let ds = generate_nav_dataset(2000, &mut rng);
        let mut suppressed = 0;
        for label in &ds.labels {
            let sum: f64 = label.iter().sum();
            if sum == 0.0 {
                suppressed += 1;
            } else {
                assert_relative_eq!(sum, 1.0, epsilon = 1e-9);
            }
        }
        // About half of recall ~ U[0, 1.2] falls below the 0.6 threshold.
        let frac = suppressed as f64 / ds.len() as f64;
        assert!((frac - 0.5).abs() < 0.05, "suppressed fraction {frac}");
    }

    #[test]
    fn dataset_regenerates_identically() {
        let a = generate_nav_dataset(100, &mut stream_rng(9, stream::NAV_DATA));
        let b = generate_nav_dataset(100, &mut stream_rng(9, stream::NAV_DATA));
        assert_eq!(a.inputs, b.inputs);
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn empty_dataset_rejected() {
        let ds = NavDataset { inputs: vec![], labels: vec![] };
        assert!(train_nav_net(&ds, &NavTrainConfig::default()).is_err());
    }

    #[test]
    fn tiny_training_run_learns_something() {
        let mut rng = stream_rng(7, stream::NAV_DATA);
        let ds = generate_nav_dataset(4000, &mut rng);
        let config = NavTrainConfig { epochs: 80, hidden: 32, ..Default::default() };
        let net = train_nav_net(&ds, &config).unwrap();
        // Far from the distillation gate, but the loss must clearly beat
        // predicting zero everywhere (label mean square ~ 1.6e-3).
        assert!(net.metrics.held_out_mse < 5e-4, "mse {}", net.metrics.held_out_mse);
        assert!(
            net.metrics.argmax_agreement > 0.2,
            "agreement {}",
            net.metrics.argmax_agreement
        );
    }

    #[test]
    fn frozen_forward_is_repeatable_and_roundtrips() {
        let mut rng = stream_rng(8, stream::NAV_DATA);
        let ds = generate_nav_dataset(500, &mut rng);
        let config = NavTrainConfig { epochs: 3, hidden: 16, ..Default::default() };
        let net = train_nav_net(&ds, &config).unwrap();
        let mut a = vec![0.0; N_ACTOR];
        let mut b = vec![0.0; N_ACTOR];
        net.forward([0.1, 0.2], [-0.3, 0.4], 0.9, &mut a);
        net.forward([0.1, 0.2], [-0.3, 0.4], 0.9, &mut b);
        assert_eq!(a, b);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("navnet.csv");
        save_nav_net(&net, &path).unwrap();
        let loaded = load_nav_net(&path).unwrap();
        loaded.forward([0.1, 0.2], [-0.3, 0.4], 0.9, &mut b);
        assert_eq!(a, b, "round-tripped net must forward identically");
        assert_eq!(loaded.metrics.epochs, 3);
    }

    #[test]
    fn gradient_matches_finite_differences_on_toy_net() {
        // Two-output toy copy of the architecture.
        let mut rng = stream_rng(11, stream::NAV_TRAIN);
        let mut net = NavNet::with_shapes(3, &mut rng);
        let input = [0.3, -0.2, 0.5, 0.1, 0.8];
        let mut label = [0.0; N_ACTOR];
        for (i, l) in label.iter_mut().enumerate() {
            *l = (i as f64 * 0.7).sin() * 0.05;
        }
        let mut scratch = Scratch::new(3);
        let mut grads = Grads::like(&net);
        net.forward_train(&input, &mut scratch);
        net.backward(&input, &label, &mut scratch, &mut grads);

        let loss = |net: &NavNet| -> f64 {
            let mut s = Scratch::new(3);
            net.forward_train(&input, &mut s);
            s.out.iter().zip(label.iter()).map(|(o, l)| (o - l) * (o - l)).sum()
        };
        let eps = 1e-6;
        let mut checked = 0;
        for li in 0..3 {
            for wi in (0..net.layers[li].w.data.len()).step_by(7) {
                let orig = net.layers[li].w.data[wi];
                net.layers[li].w.data[wi] = orig + eps;
                let up = loss(&net);
                net.layers[li].w.data[wi] = orig - eps;
                let down = loss(&net);
                net.layers[li].w.data[wi] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let analytic = grads.layers[li].0.data[wi];
                let denom = numeric.abs().max(1e-6);
                assert!(
                    (analytic - numeric).abs() / denom < 1e-4,
                    "layer {li} weight {wi}: analytic {analytic} vs numeric {numeric}"
                );
                checked += 1;
            }
        }
        assert!(checked >= 10);
    }
}
