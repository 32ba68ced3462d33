use nalgebra::DMatrix;

use super::impulse::MarkovSequence;
use crate::error::{Error, Result};
use crate::exec::{for_each_chunk, ExecMode};

fn check_len(g: &MarkovSequence, rows: usize, cols: usize) -> Result<()> {
    if g.len() < rows + cols + 1 {
        return Err(Error::ShortSequence {
            have: g.len(),
            rows,
            cols,
        });
    }
    Ok(())
}

/// Block Hankel matrix and its one-step shift. Row `i p + o`, column `j`
/// holds `G_{i+j+1}` (shift: `G_{i+j+2}`) for output `o`.
pub fn build_hankel(
    g: &MarkovSequence,
    rows: usize,
    cols: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_len(g, rows, cols)?;
    let p = g.outputs();
    let h = DMatrix::from_fn(rows * p, cols, |r, j| g.get(r % p, r / p + j + 1));
    let hs = DMatrix::from_fn(rows * p, cols, |r, j| g.get(r % p, r / p + j + 2));
    Ok((h, hs))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 8];
    let chunks = n / 8;
    for k in 0..chunks {
        let (x, y) = (&a[8 * k..8 * k + 8], &b[8 * k..8 * k + 8]);
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for k in 8 * chunks..n {
        tail += a[k] * b[k];
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Matrix-free view of the (optionally shifted) block Hankel matrix.
#[derive(Debug, Clone, Copy)]
pub struct HankelOperator<'a> {
    g: &'a MarkovSequence,
    rows: usize,
    cols: usize,
    shift: usize,
    mode: ExecMode,
}

impl<'a> HankelOperator<'a> {
    pub fn new(g: &'a MarkovSequence, rows: usize, cols: usize, mode: ExecMode) -> Result<Self> {
        check_len(g, rows, cols)?;
        Ok(Self {
            g,
            rows,
            cols,
            shift: 0,
            mode,
        })
    }

    /// The one-step shifted matrix.
    pub fn shifted(self) -> Self {
        Self { shift: 1, ..self }
    }

    pub fn nrows(&self) -> usize {
        self.rows * self.g.outputs()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let p = self.g.outputs();
        let (cols, shift) = (self.cols, self.shift);
        let g = self.g;
        for_each_chunk(self.mode, y, p, |i, block| {
            let start = i + 1 + shift;
            for (o, v) in block.iter_mut().enumerate() {
                *v = dot(&g.row(o)[start..start + cols], x);
            }
        });
    }

    /// `z = H^T u`.
    pub fn apply_t(&self, u: &[f64], z: &mut [f64]) {
        let p = self.g.outputs();
        let rows = self.rows;
        let per_output: Vec<Vec<f64>> = (0..p)
            .map(|o| (0..rows).map(|i| u[i * p + o]).collect())
            .collect();
        let shift = self.shift;
        let g = self.g;
        for_each_chunk(self.mode, z, 64, |chunk, out| {
            for (k, v) in out.iter_mut().enumerate() {
                let j = chunk * 64 + k;
                let start = j + 1 + shift;
                let mut acc = 0.0;
                for (o, uo) in per_output.iter().enumerate() {
                    acc += dot(&g.row(o)[start..start + rows], uo);
                }
                *v = acc;
            }
        });
    }
}
