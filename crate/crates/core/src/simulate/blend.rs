//! Bilinear blending of grid models in a shared modal coordinate system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::linear::LinearModel;
use crate::error::{Error, Result};
use crate::realisation::stabilise::eigen_basis;
use crate::realisation::{ModelGrid, StateSpaceModel};
use crate::tfgen::OutputLabel;

/// Relative Markov mismatch tolerated when changing to modal coordinates.
const MODAL_TOLERANCE: f64 = 1e-8;

/// Similarity transform of `m` to modal form: real poles on the diagonal,
/// complex pairs as `[[re, -im], [im, re]]` blocks, every mode driven with
/// unit gain (`B = 1`, or `[1, 0]` for a pair), modes ordered slowest
/// first. Models realised at different setpoints then share the meaning of
/// each state, so their matrices can be interpolated.
pub fn modal_form(m: &StateSpaceModel) -> Result<LinearModel> {
    let fail = || Error::ModalForm {
        soc: m.soc,
        temp: m.temp,
    };
    let n = m.order();
    let (eig, w) = eigen_basis(&m.a).ok_or_else(fail)?;
    let w_inv = w.clone().try_inverse().ok_or_else(fail)?;
    let bm = &w_inv * m.b.map(|x| Complex64::new(x, 0.0));
    let cm = m.c.map(|x| Complex64::new(x, 0.0)) * &w;
    let scale = eig.iter().map(|l| l.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-10 * scale;

    let mut modes: Vec<usize> = (0..n).filter(|&i| eig[i].im > tol || eig[i].im.abs() <= tol).collect();
    modes.sort_by(|&i, &j| {
        eig[j]
            .re
            .total_cmp(&eig[i].re)
            .then(eig[j].im.abs().total_cmp(&eig[i].im.abs()))
    });

    let p = m.outputs();
    let mut out = LinearModel {
        a: DMatrix::zeros(n, n),
        b: DVector::zeros(n),
        c: DMatrix::zeros(p, n),
        d: m.d.clone(),
        res0: m.res0.clone(),
        t_s: m.t_s,
    };
    let mut k = 0;
    for i in modes {
        let l = eig[i];
        let g = cm.column(i) * bm[i];
        if l.im.abs() <= tol {
            if k >= n {
                return Err(fail());
            }
            out.a[(k, k)] = l.re;
            out.b[k] = 1.0;
            out.c.set_column(k, &g.map(|z| z.re));
            k += 1;
        } else {
            if k + 1 >= n {
                return Err(fail());
            }
            out.a[(k, k)] = l.re;
            out.a[(k, k + 1)] = -l.im;
            out.a[(k + 1, k)] = l.im;
            out.a[(k + 1, k + 1)] = l.re;
            out.b[k] = 1.0;
            out.c.set_column(k, &g.map(|z| 2.0 * z.re));
            out.c.set_column(k + 1, &g.map(|z| -2.0 * z.im));
            k += 2;
        }
    }
    if k != n || markov_mismatch(m, &out, 4 * n + 20) > MODAL_TOLERANCE {
        return Err(fail());
    }
    Ok(out)
}

fn markov_mismatch(m: &StateSpaceModel, t: &LinearModel, len: usize) -> f64 {
    let (mut x, mut z) = (m.b.clone(), t.b.clone());
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..len {
        let (ya, yb) = (&m.c * &x, &t.c * &z);
        num += (&ya - &yb).norm_squared();
        den += ya.norm_squared();
        x = &m.a * x;
        z = &t.a * z;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Bracket of `v` on an ascending axis: `(lo, hi, t)` with weight `t` on
/// `hi`. A single-point axis admits only that point.
fn bracket(axis: &[f64], v: f64) -> Option<(usize, usize, f64)> {
    let tol = 1e-12 * v.abs().max(1.0);
    let (first, last) = (axis[0], *axis.last()?);
    if !(v >= first - tol && v <= last + tol) {
        return None;
    }
    if axis.len() == 1 {
        return Some((0, 0, 0.0));
    }
    let v = v.clamp(first, last);
    let i = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
    let t = (v - axis[i]) / (axis[i + 1] - axis[i]);
    Some((i, i + 1, t))
}

/// Modal models on a (soc, temperature) grid.
#[derive(Debug, Clone)]
pub struct BlendedGrid {
    socs: Vec<f64>,
    temps: Vec<f64>,
    nodes: Vec<LinearModel>,
    labels: Vec<OutputLabel>,
}

impl BlendedGrid {
    pub fn new(grid: &ModelGrid) -> Result<Self> {
        let nodes = grid.models.iter().map(modal_form).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            socs: grid.socs.clone(),
            temps: grid.temps.clone(),
            nodes,
            labels: grid.models[0].labels.clone(),
        })
    }

    pub fn labels(&self) -> &[OutputLabel] {
        &self.labels
    }

    pub fn socs(&self) -> &[f64] {
        &self.socs
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn order(&self) -> usize {
        self.nodes[0].order()
    }

    pub fn outputs(&self) -> usize {
        self.nodes[0].outputs()
    }

    pub fn t_s(&self) -> f64 {
        self.nodes[0].t_s
    }

    pub fn node(&self, si: usize, ti: usize) -> &LinearModel {
        &self.nodes[ti * self.socs.len() + si]
    }

    /// Node indices and bilinear weights for a query; zero weights dropped.
    pub fn weights(&self, soc: f64, temp: f64) -> Result<Vec<(usize, f64)>> {
        let out = || Error::OutOfHull { soc, temp };
        let (s0, s1, ts) = bracket(&self.socs, soc).ok_or_else(out)?;
        let (t0, t1, tt) = bracket(&self.temps, temp).ok_or_else(out)?;
        let n = self.socs.len();
        let mut w: Vec<(usize, f64)> = Vec::with_capacity(4);
        for (ti, wt) in [(t0, 1.0 - tt), (t1, tt)] {
            for (si, ws) in [(s0, 1.0 - ts), (s1, ts)] {
                let weight = wt * ws;
                if weight == 0.0 {
                    continue;
                }
                let idx = ti * n + si;
                match w.iter_mut().find(|(i, _)| *i == idx) {
                    Some(e) => e.1 += weight,
                    None => w.push((idx, weight)),
                }
            }
        }
        Ok(w)
    }

    pub fn blend(&self, soc: f64, temp: f64) -> Result<LinearModel> {
        let mut out = LinearModel::zeros(self.order(), self.outputs(), self.t_s());
        self.blend_into(soc, temp, &mut out)?;
        Ok(out)
    }

    /// Interpolate `A`, `C`, `D` and `res0` into `out`; `B` is shared.
    pub fn blend_into(&self, soc: f64, temp: f64, out: &mut LinearModel) -> Result<()> {
        let w = self.weights(soc, temp)?;
        let first = &self.nodes[w[0].0];
        out.a.copy_from(&first.a);
        out.a *= w[0].1;
        out.c.copy_from(&first.c);
        out.c *= w[0].1;
        out.d.copy_from(&first.d);
        out.d *= w[0].1;
        out.res0.copy_from(&first.res0);
        out.res0 *= w[0].1;
        for &(i, wi) in &w[1..] {
            let n = &self.nodes[i];
            out.a.zip_apply(&n.a, |o, x| *o += wi * x);
            out.c.zip_apply(&n.c, |o, x| *o += wi * x);
            out.d.axpy(wi, &n.d, 1.0);
            out.res0.axpy(wi, &n.res0, 1.0);
        }
        out.b.copy_from(&first.b);
        out.t_s = first.t_s;
        Ok(())
    }
}
