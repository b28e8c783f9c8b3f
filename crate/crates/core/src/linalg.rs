//! Minimal dense and sparse matrix kinds used by the neural modules.
//!
//! Weights are stored row-major as `[post][pre]` so that a forward pass
//! reads each row contiguously and a Hebbian update touches one row per
//! postsynaptic unit. Nothing here allocates in the hot path.

use serde::{Deserialize, Serialize};

/// Dense row-major matrix, rows = postsynaptic units, cols = presynaptic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `out[r] = dot(row_r, input)`.
    pub fn forward(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, u) in row.iter().zip(input.iter()) {
                acc += w * u;
            }
            out[r] = acc;
        }
    }

    /// Forward pass that skips zero entries of a mostly-silent input.
    /// `active` lists the indices of the nonzero entries.
    pub fn forward_active(&self, input: &[f64], active: &[usize], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for &j in active {
                acc += row[j] * input[j];
            }
            out[r] = acc;
        }
    }

    /// Hebbian outer-product accumulation:
    /// `W[r][c] += scale * post[r] * pre[c]`, skipping zero factors.
    pub fn outer_acc(&mut self, post: &[f64], pre: &[f64], scale: f64) {
        debug_assert_eq!(post.len(), self.rows);
        debug_assert_eq!(pre.len(), self.cols);
        if scale == 0.0 {
            return;
        }
        for (r, &p) in post.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let coeff = scale * p;
            let row = self.row_mut(r);
            for (w, &u) in row.iter_mut().zip(pre.iter()) {
                if u != 0.0 {
                    *w += coeff * u;
                }
            }
        }
    }

    /// Mean of squared element-wise differences against another matrix of
    /// the same shape.
    pub fn mean_sq_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        if self.data.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        sum / self.data.len() as f64
    }
}

/// Compressed sparse rows, used for the reservoir recurrent weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMat {
    /// Build from per-row (col, value) entries.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(entries.len(), rows);
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &entries {
            for &(c, v) in row {
                debug_assert!(c < cols);
                col_idx.push(c as u32);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out[r] = sum_c W[r][c] * input[c]`.
    pub fn forward(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * input[self.col_idx[k] as usize];
            }
            out[r] = acc;
        }
    }
}

/// Indices of nonzero entries, reused as scratch by the agent step.
pub fn active_indices(v: &[f64], out: &mut Vec<usize>) {
    out.clear();
    for (i, &x) in v.iter().enumerate() {
        if x != 0.0 {
            out.push(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_by_hand() {
        let m = Mat::from_fn(2, 3, |r, c| (r * 3 + c) as f64);
        let mut out = vec![0.0; 2];
        m.forward(&[1.0, 0.0, 2.0], &mut out);
        assert_eq!(out, vec![4.0, 13.0]);
    }

    #[test]
    fn forward_active_equals_dense() {
        let m = Mat::from_fn(4, 6, |r, c| ((r * 7 + c * 3) % 5) as f64 - 2.0);
        let input = [0.0, 1.5, 0.0, -0.5, 0.0, 2.0];
        let mut active = Vec::new();
        active_indices(&input, &mut active);
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        m.forward(&input, &mut a);
        m.forward_active(&input, &active, &mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn outer_acc_rank_one() {
        let mut m = Mat::zeros(2, 3);
        m.outer_acc(&[1.0, 2.0], &[3.0, 0.0, -1.0], 0.5);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 2), -1.0);
    }

    #[test]
    fn sparse_forward_matches_dense() {
        let entries = vec![vec![(0, 1.0), (2, -2.0)], vec![], vec![(1, 0.5)]];
        let s = SparseMat::from_rows(3, 3, entries);
        let mut out = vec![0.0; 3];
        s.forward(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, vec![-5.0, 0.0, 1.0]);
        assert_eq!(s.nnz(), 3);
    }
}
