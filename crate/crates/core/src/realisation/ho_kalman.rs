use nalgebra::{DMatrix, DVector};

use super::svd::{LinearOperator, TruncatedSvd};
use crate::error::{Error, Result};

/// Minimal discrete realisation `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realisation {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl Realisation {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `C A^(t-1) B` for `t = 1..=len` (column `t - 1`), one row per output.
    pub fn markov(&self, len: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.outputs(), len);
        let mut x = self.b.clone();
        for t in 0..len {
            out.set_column(t, &(&self.c * &x));
            x = &self.a * x;
        }
        out
    }
}

const ORDER_FLOOR: f64 = 1e-14;

/// Balanced Ho-Kalman realisation from the truncated factors of the block
/// Hankel matrix (`p` outputs per block row).
pub fn ho_kalman<O: LinearOperator + ?Sized>(
    svd: &TruncatedSvd,
    h_shift: &O,
    g0: &[f64],
) -> Result<Realisation> {
    let m = svd.sigma.len();
    let p = g0.len();
    let s1 = svd.sigma[0];
    let sm = svd.sigma[m - 1];
    if !(sm > ORDER_FLOOR * s1) {
        return Err(Error::OrderDeficient {
            order: m,
            sigma: sm,
            sigma_max: s1,
        });
    }
    let half: Vec<f64> = svd.sigma.iter().map(|s| s.sqrt()).collect();
    let mut hv = DMatrix::zeros(h_shift.nrows(), m);
    let mut col = vec![0.0; h_shift.nrows()];
    for i in 0..m {
        let v: Vec<f64> = svd.v.column(i).iter().copied().collect();
        h_shift.apply(&v, &mut col);
        hv.column_mut(i).copy_from_slice(&col);
    }
    let core = svd.u.tr_mul(&hv);
    let a = DMatrix::from_fn(m, m, |r, c| core[(r, c)] / (half[r] * half[c]));
    let b = DVector::from_fn(m, |i, _| half[i] * svd.v[(0, i)]);
    let c = DMatrix::from_fn(p, m, |o, i| svd.u[(o, i)] * half[i]);
    Ok(Realisation {
        a,
        b,
        c,
        d: DVector::from_column_slice(g0),
    })
}
