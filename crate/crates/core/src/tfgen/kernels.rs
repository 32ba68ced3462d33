//! Scalar kernels shared by the electrode transfer functions.

use num_complex::Complex64;

/// Below this `|beta|` the Jacobsen-West kernel switches to its Taylor series.
pub const JW_SERIES_THRESHOLD: f64 = 1e-3;
/// Below this `|nu|` the hyperbolic ratios switch to series expansions.
const NU_SERIES_THRESHOLD: f64 = 1e-3;

/// `R_s sqrt(s / D_s)` on the principal branch.
pub fn beta(s: Complex64, radius: f64, diffusivity: f64) -> Complex64 {
    radius * (s / diffusivity).sqrt()
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// `tanh(z)` that stays finite for large `|Re z|`.
pub fn tanh(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -tanh(-z);
    }
    // (1 - e^{-2z}) / (1 + e^{-2z})
    let e = (-2.0 * z).exp();
    -expm1(-2.0 * z) / (1.0 + e)
}

/// Jacobsen-West surface-concentration kernel `tanh(b) / (tanh(b) - b)`.
///
/// Uses `-3/b^2 - 1/5 + b^2/175 - 2 b^4/7875` below
/// [`JW_SERIES_THRESHOLD`], where the direct form cancels catastrophically.
pub fn jw_kernel(b: Complex64) -> Complex64 {
    if b.norm() < JW_SERIES_THRESHOLD {
        return jw_series(b);
    }
    let t = tanh(b);
    t / (t - b)
}

pub fn jw_series(b: Complex64) -> Complex64 {
    let b2 = b * b;
    -3.0 / b2 - 0.2 + b2 / 175.0 - 2.0 * b2 * b2 / 7875.0
}

/// `nu cosh(a nu) / sinh(nu)` for `a` in `[0, 1]` and `Re nu >= 0`.
pub fn nu_cosh_over_sinh(a: f64, nu: Complex64) -> Complex64 {
    if nu.norm() < NU_SERIES_THRESHOLD {
        let n2 = nu * nu;
        return 1.0 + n2 * (0.5 * a * a - 1.0 / 6.0);
    }
    // (e^{(a-1) nu} + e^{-(a+1) nu}) / (1 - e^{-2 nu})
    let num = ((a - 1.0) * nu).exp() + (-(a + 1.0) * nu).exp();
    -nu * num / expm1(-2.0 * nu)
}

/// `(cosh(nu) - cosh(b nu)) / (nu sinh(nu))` for `b` in `[0, 1]`.
pub fn cosh_gap(b: f64, nu: Complex64) -> Complex64 {
    if nu.norm() < NU_SERIES_THRESHOLD {
        let n2 = nu * nu;
        let b2 = b * b;
        return 0.5 * (1.0 - b2) + n2 * ((1.0 - b2 * b2) / 24.0 - (1.0 - b2) / 12.0);
    }
    (nu_cosh_over_sinh(1.0, nu) - nu_cosh_over_sinh(b, nu)) / (nu * nu)
}
