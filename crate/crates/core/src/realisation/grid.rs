use std::f64::consts::PI;

use num_complex::Complex64;

/// Continuous frequencies matching the DFT bins of an `n`-point sequence
/// at period `t_s` under the bilinear map,
/// `s_f = (2/T_s) (z - 1)/(z + 1)` with `z = exp(j 2 pi f / n)`.
///
/// `s_0` is exactly zero. The map's pole at `f = n/2` is returned as
/// infinity; bins above it are exact conjugates of their mirror.
pub fn bilinear_grid(t_s: f64, n: usize) -> Vec<Complex64> {
    assert!(n >= 2 && n % 2 == 0, "grid length must be even and >= 2");
    let half = n / 2;
    let mut s = vec![Complex64::new(0.0, 0.0); n];
    for (f, v) in s.iter_mut().enumerate().take(half).skip(1) {
        *v = Complex64::new(0.0, 2.0 / t_s * (PI * f as f64 / n as f64).tan());
    }
    s[half] = Complex64::new(f64::INFINITY, 0.0);
    for f in half + 1..n {
        s[f] = s[n - f].conj();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_quarter_point() {
        let s = bilinear_grid(0.25, 4096);
        assert_eq!(s[0], Complex64::new(0.0, 0.0));
        let q = s[1024];
        assert!(q.re == 0.0 && (q.im - 8.0).abs() < 1e-12);
        assert!(!s[2048].is_finite());
    }

    #[test]
    fn conjugate_symmetric() {
        let s = bilinear_grid(0.5, 1000);
        for f in 1..1000 {
            if f != 500 {
                assert_eq!(s[1000 - f], s[f].conj());
            }
        }
    }

    #[test]
    fn matches_mobius_form() {
        let (t, n) = (0.25, 64);
        let s = bilinear_grid(t, n);
        for f in 1..n / 2 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * f as f64 / n as f64);
            let m = 2.0 / t * (z - 1.0) / (z + 1.0);
            assert!((m - s[f]).norm() < 1e-12 * m.norm());
        }
    }
}
