//! Pole reflection into the unit disc.

use log::debug;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest admissible spectral radius after stabilisation.
pub const MAX_RADIUS: f64 = 1.0 - 1e-12;
/// Radius used when a pole sits on (or rounds onto) the unit circle.
const CLAMP_RADIUS: f64 = 1.0 - 1e-10;
/// Radius for diagonal blocks in the Schur fallback.
const SCHUR_RADIUS: f64 = 1.0 - 1e-9;
const CONDITION_LIMIT: f64 = 1e10;

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

/// Target for one pole: `lambda / |lambda|^2` outside the disc, a radial
/// clamp on the boundary, unchanged inside.
fn reflect(l: Complex64) -> Complex64 {
    let r = l.norm();
    let out = if r > 1.0 { l / (r * r) } else { l };
    if out.norm() > MAX_RADIUS {
        out * (CLAMP_RADIUS / out.norm())
    } else {
        out
    }
}

/// Reflect every pole with `|lambda| > 1` to `1 / conj(lambda)` keeping its
/// eigenvector. Returns `a` unchanged when already stable.
pub fn stabilise(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    if eig.iter().all(|l| l.norm() <= MAX_RADIUS) {
        return Ok(a.clone());
    }
    match eigen_reflect(a, &eig) {
        Some(out) => Ok(out),
        None => {
            debug!("eigenvector basis ill-conditioned; using Schur-based stabilisation");
            schur_clamp(a)
        }
    }
}

/// Null vector of `a - lambda I`.
fn eigenvector(a: &DMatrix<Complex64>, l: Complex64) -> nalgebra::DVector<Complex64> {
    let n = a.nrows();
    let shifted = a - DMatrix::<Complex64>::identity(n, n) * l;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    vt.row(k).adjoint()
}

/// Eigenvalues of `a` and a matching eigenvector matrix whose columns for
/// complex poles come in conjugate pairs. `None` when the basis is too
/// ill-conditioned to invert reliably.
pub(crate) fn eigen_basis(a: &DMatrix<f64>) -> Option<(Vec<Complex64>, DMatrix<Complex64>)> {
    let eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    let w = paired_vectors(a, &eig)?;
    Some((eig, w))
}

fn paired_vectors(a: &DMatrix<f64>, eig: &[Complex64]) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let scale = eig.iter().map(|l| l.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-10 * scale;
    // pair every complex pole with its conjugate so the rebuilt matrix is real
    let mut vectors: Vec<Option<nalgebra::DVector<Complex64>>> = vec![None; n];
    for i in 0..n {
        if vectors[i].is_some() {
            continue;
        }
        let v = eigenvector(&ac, eig[i]);
        if eig[i].im.abs() > tol {
            let partner = (0..n)
                .filter(|&j| j != i && vectors[j].is_none())
                .min_by(|&x, &y| {
                    (eig[x] - eig[i].conj())
                        .norm()
                        .total_cmp(&(eig[y] - eig[i].conj()).norm())
                })?;
            if (eig[partner] - eig[i].conj()).norm() > tol {
                return None;
            }
            vectors[partner] = Some(v.map(|z| z.conj()));
        }
        vectors[i] = Some(v);
    }
    let mut w = DMatrix::<Complex64>::zeros(n, n);
    for (j, v) in vectors.iter().enumerate() {
        w.set_column(j, v.as_ref()?);
    }
    let sv = w.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    (cond < CONDITION_LIMIT).then_some(w)
}

fn eigen_reflect(a: &DMatrix<f64>, eig: &[Complex64]) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let scale = eig.iter().map(|l| l.norm()).fold(0.0, f64::max).max(1.0);
    let w = paired_vectors(a, eig)?;
    let w_inv = w.clone().try_inverse()?;
    let delta = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eig.iter().map(|&l| reflect(l) - l),
    ));
    let update = &w * delta * w_inv;
    let imag = update.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * scale {
        return None;
    }
    let out = a + update.map(|z| z.re);
    (spectral_radius(&out) <= MAX_RADIUS).then_some(out)
}

/// Real Schur fallback: scale each unstable diagonal block of `T` so its
/// spectral radius becomes `1 - 1e-9`.
fn schur_clamp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let (q, mut t) = Schur::new(a.clone()).unpack();
    let mut i = 0;
    while i < n {
        let size = if i + 1 < n && t[(i + 1, i)].abs() > 0.0 { 2 } else { 1 };
        let block = t.view((i, i), (size, size)).clone_owned();
        let r = block
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max);
        if r > MAX_RADIUS {
            let f = SCHUR_RADIUS / r;
            for x in i..i + size {
                for y in i..i + size {
                    t[(x, y)] *= f;
                }
            }
        }
        i += size;
    }
    let out = &q * t * q.transpose();
    if spectral_radius(&out) > MAX_RADIUS {
        return Err(Error::Dimension(
            "stabilisation failed to bring the spectral radius inside the unit disc".into(),
        ));
    }
    Ok(out)
}
