//! Extraction of `s = 0` integrator poles from transfer functions.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LEVELS: usize = 8;
const MAX_HALVINGS: usize = 8;
const TOLERANCE: f64 = 1e-8;
/// Residues below this fraction of the sampled `|s G(s)|` are treated as zero.
const NEGLIGIBLE: f64 = 1e-9;

/// Result of removing a pole at the origin: `G(s) = res0 / s + G*(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorResidue {
    pub res0: f64,
    /// `G*(0)`.
    pub dc: Complex64,
}

impl IntegratorResidue {
    /// Corrected response `G*(s)` given the raw value `G(s)`.
    pub fn correct(&self, s: Complex64, raw: Complex64) -> Complex64 {
        if s == Complex64::new(0.0, 0.0) {
            self.dc
        } else if self.res0 == 0.0 {
            raw
        } else {
            raw - self.res0 / s
        }
    }
}

/// Neville extrapolation of samples `(x_k, y_k)` to `x = 0`; returns the
/// estimate and the change from the previous diagonal entry.
fn extrapolate(x: &[f64], y: &[Complex64]) -> (Complex64, f64) {
    let mut t = y.to_vec();
    let n = x.len();
    let mut prev = t[n - 1];
    let mut last = t[0];
    for m in 1..n {
        for i in 0..n - m {
            t[i] = (x[i + m] * t[i] - x[i] * t[i + 1]) / (x[i + m] - x[i]);
        }
        prev = last;
        last = t[0];
    }
    (last, (last - prev).norm())
}

/// Limit `lim s->0+ s G(s)` and the corrected value `G*(0)`, from real
/// samples `s_k = s_ref 2^-k`. `row` names the output in errors.
pub fn extract_integrator_residue<F>(g: F, s_ref: f64, row: &str) -> Result<IntegratorResidue>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut s0 = s_ref;
    for _ in 0..MAX_HALVINGS {
        if let Some(r) = try_extract(&g, s0) {
            return Ok(r);
        }
        s0 *= 0.5;
    }
    Err(Error::ResidueDivergence(row.to_string()))
}

fn try_extract<F>(g: &F, s_ref: f64) -> Option<IntegratorResidue>
where
    F: Fn(Complex64) -> Complex64,
{
    let xs: Vec<f64> = (0..LEVELS).map(|k| s_ref * 0.5f64.powi(k as i32)).collect();
    let raw: Vec<Complex64> = xs.iter().map(|&s| g(Complex64::new(s, 0.0))).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sg: Vec<Complex64> = xs.iter().zip(&raw).map(|(s, v)| v * s).collect();
    let scale = sg.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (limit, delta) = extrapolate(&xs, &sg);
    if delta > TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    let res0 = if limit.norm() <= NEGLIGIBLE * scale || scale == 0.0 {
        0.0
    } else {
        limit.re
    };
    let rest: Vec<Complex64> = xs.iter().zip(&raw).map(|(s, v)| v - res0 / s).collect();
    let rest_scale = rest.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let raw_scale = raw.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (dc, delta) = extrapolate(&xs, &rest);
    if delta > 1e-6 * rest_scale + 1e-12 * raw_scale {
        return None;
    }
    Some(IntegratorResidue { res0, dc })
}
