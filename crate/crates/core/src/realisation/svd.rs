//! Truncated singular value decomposition.

use log::info;
use nalgebra::{DMatrix, DVector};

use super::config::SvdStrategy;
use super::hankel::{dot, HankelOperator};
use crate::error::{Error, Result};

/// A real linear map available through products with it and its transpose.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn apply_t(&self, u: &[f64], z: &mut [f64]);

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        let mut e = vec![0.0; self.ncols()];
        let mut col = vec![0.0; self.nrows()];
        for j in 0..self.ncols() {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        m
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let r = self * DVector::from_column_slice(x);
        y.copy_from_slice(r.as_slice());
    }
    fn apply_t(&self, u: &[f64], z: &mut [f64]) {
        let r = self.tr_mul(&DVector::from_column_slice(u));
        z.copy_from_slice(r.as_slice());
    }
    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

impl LinearOperator for HankelOperator<'_> {
    fn nrows(&self) -> usize {
        HankelOperator::nrows(self)
    }
    fn ncols(&self) -> usize {
        HankelOperator::ncols(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        HankelOperator::apply(self, x, y)
    }
    fn apply_t(&self, u: &[f64], z: &mut [f64]) {
        HankelOperator::apply_t(self, u, z)
    }
}

/// Leading singular triplets, `sigma` descending.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    /// Strategy that produced the result (after any fallback).
    pub strategy: SvdStrategy,
    /// Lanczos steps taken (0 for dense).
    pub steps: usize,
}

/// Top-`m` singular triplets of `op`. The iterative strategy falls back to
/// a dense decomposition, with a logged notice, when it does not converge.
pub fn truncated_svd<O: LinearOperator + ?Sized>(
    op: &O,
    m: usize,
    strategy: SvdStrategy,
) -> Result<TruncatedSvd> {
    let dim = op.nrows().min(op.ncols());
    if m == 0 || m > dim {
        return Err(Error::OrderTooLarge { order: m, dim });
    }
    if strategy == SvdStrategy::Iterative {
        match lanczos_svd(op, m) {
            Some(r) => return Ok(r),
            None => info!(
                "Lanczos bidiagonalisation did not converge for a {}x{} operator; using dense SVD",
                op.nrows(),
                op.ncols()
            ),
        }
    }
    dense_svd(&op.to_dense(), m)
}

pub fn dense_svd(h: &DMatrix<f64>, m: usize) -> Result<TruncatedSvd> {
    let dim = h.nrows().min(h.ncols());
    if m == 0 || m > dim {
        return Err(Error::OrderTooLarge { order: m, dim });
    }
    let svd = h.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Dimension("dense SVD returned no vectors".into())),
    };
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let idx = &idx[..m];
    Ok(TruncatedSvd {
        u: DMatrix::from_fn(h.nrows(), m, |r, c| u[(r, idx[c])]),
        sigma: DVector::from_fn(m, |c, _| svd.singular_values[idx[c]]),
        v: DMatrix::from_fn(h.ncols(), m, |r, c| vt[(idx[c], r)]),
        strategy: SvdStrategy::Dense,
        steps: 0,
    })
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn reorthogonalise(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
}

const RESIDUAL_REL: f64 = 1e-11;
const RESIDUAL_ABS: f64 = 1e-14;

/// Golub-Kahan-Lanczos bidiagonalisation with full reorthogonalisation.
fn lanczos_svd<O: LinearOperator + ?Sized>(op: &O, m: usize) -> Option<TruncatedSvd> {
    let (nr, nc) = (op.nrows(), op.ncols());
    let max_steps = nr.min(nc).min(20 * m + 200);
    let first_check = (2 * m + 8).min(max_steps);

    let mut v: Vec<f64> = (0..nc)
        .map(|i| 1.0 + 0.5 * (0.618_033_988_75 * i as f64 + 0.3).sin())
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut u = vec![0.0; nr];
    let mut w = vec![0.0; nc];

    for k in 0..max_steps {
        op.apply(&vs[k], &mut u);
        if k > 0 {
            let b = beta[k - 1];
            for (ui, pi) in u.iter_mut().zip(&us[k - 1]) {
                *ui -= b * pi;
            }
        }
        reorthogonalise(&mut u, &us);
        let a = norm(&u);
        let scale = alpha.first().copied().unwrap_or(a).max(a);
        if a <= 1e-14 * scale {
            // invariant subspace: the Krylov space already holds the range
            // with beta_k kept the k x (k+1) bidiagonal is exact
            return (k >= m).then(|| ritz(&us, &vs, &alpha, &beta, m, nr, nc));
        }
        u.iter_mut().for_each(|x| *x /= a);
        alpha.push(a);
        us.push(u.clone());

        op.apply_t(&us[k], &mut w);
        for (wi, vi) in w.iter_mut().zip(&vs[k]) {
            *wi -= a * vi;
        }
        reorthogonalise(&mut w, &vs);
        let b = norm(&w);
        let steps = k + 1;
        if b <= 1e-14 * scale {
            return (steps >= m).then(|| ritz(&us, &vs, &alpha, &beta, m, nr, nc));
        }
        w.iter_mut().for_each(|x| *x /= b);
        beta.push(b);
        vs.push(w.clone());

        if steps >= first_check {
            let (sig, p, _) = small_svd(&alpha, &beta[..steps - 1]);
            let s1 = sig[0];
            let converged = (0..m).all(|i| {
                let r = b * p[(steps - 1, i)].abs();
                r <= RESIDUAL_REL * sig[i] || r <= RESIDUAL_ABS * s1
            });
            if converged {
                return Some(ritz(&us, &vs, &alpha, &beta[..steps - 1], m, nr, nc));
            }
        }
    }
    None
}

/// SVD of the upper bidiagonal matrix with diagonal `alpha` and
/// superdiagonal `beta` (`k x k`, or `k x (k+1)` when `beta` has `k`
/// entries), descending.
fn small_svd(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = alpha.len();
    let cols = beta.len() + 1;
    let b = DMatrix::from_fn(k, cols, |r, c| {
        if r == c {
            alpha[r]
        } else if c == r + 1 {
            beta[r]
        } else {
            0.0
        }
    });
    let svd = b.svd(true, true);
    let (p, qt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|x, y| svd.singular_values[*y].total_cmp(&svd.singular_values[*x]));
    let sig = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let p = DMatrix::from_fn(k, k, |r, c| p[(r, idx[c])]);
    let q = DMatrix::from_fn(cols, k, |r, c| qt[(idx[c], r)]);
    (sig, p, q)
}

fn ritz(
    us: &[Vec<f64>],
    vs: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    m: usize,
    nr: usize,
    nc: usize,
) -> TruncatedSvd {
    let k = alpha.len();
    let (sig, p, q) = small_svd(alpha, beta);
    let mut u = DMatrix::zeros(nr, m);
    let mut v = DMatrix::zeros(nc, m);
    for i in 0..m {
        for j in 0..k {
            let pj = p[(j, i)];
            for (r, x) in us[j].iter().enumerate() {
                u[(r, i)] += pj * x;
            }
        }
        for j in 0..q.nrows() {
            let qj = q[(j, i)];
            for (r, x) in vs[j].iter().enumerate() {
                v[(r, i)] += qj * x;
            }
        }
    }
    TruncatedSvd {
        u,
        sigma: DVector::from_fn(m, |i, _| sig[i]),
        v,
        strategy: SvdStrategy::Iterative,
        steps: k,
    }
}
