//! Electrolyte potential and concentration across the full cell.
//!
//! Concentration uses the eigenfunctions of the weighted Neumann problem
//! `(D_eff psi')' = -lambda eps psi` on `[0, L_tot]` with continuity of
//! `psi` and `D_eff psi'` at both electrode/separator interfaces. In each
//! region `psi = a cos(k x) + b sin(k x)` with `k = sqrt(lambda eps / D_eff)`
//! and global `x`.

use num_complex::Complex64;

use super::electrode::ElectrodeTf;
use super::kernels::nu_cosh_over_sinh;
use crate::cellparams::{CellParams, Electrode, Setpoint};
use crate::error::{Error, Result};

const POINTS_PER_DECADE: usize = 1024;
const MAX_SCAN_DECADES: usize = 14;

#[derive(Debug, Clone, Copy)]
struct Region {
    start: f64,
    len: f64,
    eps: f64,
    diff: f64,
}

fn regions(p: &CellParams) -> [Region; 3] {
    let [_, a, b, _] = p.boundaries();
    let de = p.electrolyte_diffusivity;
    let r = |start, len, eps: f64, brugg: f64| Region {
        start,
        len,
        eps,
        diff: de * eps.powf(brugg),
    };
    [
        r(0.0, p.neg.thickness, p.neg.porosity, p.neg.bruggeman),
        r(a, p.sep.thickness, p.sep.porosity, p.sep.bruggeman),
        r(b, p.pos.thickness, p.pos.porosity, p.pos.bruggeman),
    ]
}

fn wavenumber(lambda: f64, r: &Region) -> f64 {
    (lambda * r.eps / r.diff).sqrt()
}

/// Propagate `(psi, D_eff psi')` from `x = 0` (where it is `(1, 0)`)
/// through every region; returns the state at each region start plus the end.
fn propagate(lambda: f64, regs: &[Region; 3]) -> [(f64, f64); 4] {
    let mut out = [(1.0, 0.0); 4];
    for (i, r) in regs.iter().enumerate() {
        let (psi, q) = out[i];
        let k = wavenumber(lambda, r);
        let dk = r.diff * k;
        let (sn, cs) = (k * r.len).sin_cos();
        out[i + 1] = (psi * cs + q * sn / dk, -psi * dk * sn + q * cs);
    }
    out
}

/// Scaled Neumann mismatch at `x = L_tot`; its roots are the eigenvalues.
fn mismatch(lambda: f64, regs: &[Region; 3]) -> f64 {
    let end = propagate(lambda, regs)[3];
    end.1 / (regs[2].diff * wavenumber(lambda, &regs[2]))
}

/// Electrolyte eigenvalues and eigenfunction coefficients.
#[derive(Debug, Clone)]
pub struct EigenSet {
    /// Ascending eigenvalues, 1/s.
    pub lambda: Vec<f64>,
    /// `[k1, k3, k4, k5, k6]`: `psi_n = k1 cos`, `psi_s = k3 cos + k4 sin`,
    /// `psi_p = k5 cos + k6 sin`, normalised so `int eps psi^2 dx = 1`.
    pub coeffs: Vec<[f64; 5]>,
    /// Scaled lengths `(L_n k_n, (L_n + L_s) k_p, L_tot k_p)`.
    pub scaled_lengths: Vec<(f64, f64, f64)>,
    regions: [Region; 3],
}

impl EigenSet {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    fn region_index(&self, x: f64) -> usize {
        if x < self.regions[1].start {
            0
        } else if x <= self.regions[2].start {
            1
        } else {
            2
        }
    }

    fn region_coeffs(&self, mode: usize, region: usize) -> (f64, f64) {
        let c = &self.coeffs[mode];
        match region {
            0 => (c[0], 0.0),
            1 => (c[1], c[2]),
            _ => (c[3], c[4]),
        }
    }

    /// Eigenfunction `psi_mode(x)`.
    pub fn psi(&self, mode: usize, x: f64) -> f64 {
        let r = self.region_index(x);
        let k = wavenumber(self.lambda[mode], &self.regions[r]);
        let (a, b) = self.region_coeffs(mode, r);
        let (sn, cs) = (k * x).sin_cos();
        a * cs + b * sn
    }

    fn psi_and_flux(&self, mode: usize, region: usize, x: f64) -> (f64, f64) {
        let reg = &self.regions[region];
        let k = wavenumber(self.lambda[mode], reg);
        let (a, b) = self.region_coeffs(mode, region);
        let (sn, cs) = (k * x).sin_cos();
        (a * cs + b * sn, reg.diff * k * (-a * sn + b * cs))
    }

    /// Largest relative violation of the interface continuity and end
    /// boundary conditions for `mode`.
    pub fn continuity_residual(&self, mode: usize) -> f64 {
        let [_, s, p] = self.regions;
        let scale_psi = self
            .coeffs[mode]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()));
        let k_ref = wavenumber(self.lambda[mode], &p);
        let scale_q = scale_psi * p.diff * k_ref;
        let mut worst = 0.0_f64;
        for (left, right, x) in [(0, 1, s.start), (1, 2, p.start)] {
            let (pl, ql) = self.psi_and_flux(mode, left, x);
            let (pr, qr) = self.psi_and_flux(mode, right, x);
            worst = worst.max((pl - pr).abs() / scale_psi);
            worst = worst.max((ql - qr).abs() / scale_q);
        }
        let end = p.start + p.len;
        let (_, q) = self.psi_and_flux(mode, 2, end);
        worst.max(q.abs() / scale_q)
    }

    /// Normalised boundary mismatch at eigenvalue `mode`.
    pub fn determinant_residual(&self, mode: usize) -> f64 {
        mismatch(self.lambda[mode], &self.regions).abs()
    }
}

/// Interface-matching function whose roots are the electrolyte eigenvalues.
pub fn eigen_determinant(params: &CellParams, lambda: f64) -> f64 {
    mismatch(lambda, &regions(params))
}

/// First `count` positive eigenvalues of the electrolyte diffusion problem.
pub fn electrolyte_eigenvalues(params: &CellParams, count: usize) -> Result<EigenSet> {
    if count == 0 {
        return Err(Error::Config("need at least one electrolyte mode".into()));
    }
    let regs = regions(params);
    let l_tot = params.total_thickness();
    let d_min = regs.iter().map(|r| r.diff).fold(f64::INFINITY, f64::min);
    let eps_max = regs.iter().map(|r| r.eps).fold(0.0, f64::max);
    let lo = d_min / (eps_max * l_tot * l_tot) * 1e-2;

    let ratio = 10f64.powf(1.0 / POINTS_PER_DECADE as f64);
    let mut roots = Vec::with_capacity(count);
    let mut a = lo;
    let mut fa = mismatch(a, &regs);
    let mut steps = 0;
    // geometric scan; keeps going past the usual six decades while modes
    // are still missing
    while roots.len() < count {
        if steps >= MAX_SCAN_DECADES * POINTS_PER_DECADE {
            return Err(Error::RootBracketing {
                found: roots.len(),
                requested: count,
                lo,
                hi: a,
            });
        }
        let b = a * ratio;
        let fb = mismatch(b, &regs);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(a, b, fa, &regs));
        }
        a = b;
        fa = fb;
        steps += 1;
    }

    let mut coeffs = Vec::with_capacity(count);
    let mut scaled = Vec::with_capacity(count);
    for &lambda in &roots {
        coeffs.push(mode_coefficients(lambda, &regs));
        let kn = wavenumber(lambda, &regs[0]);
        let kp = wavenumber(lambda, &regs[2]);
        scaled.push((
            regs[0].len * kn,
            (regs[0].len + regs[1].len) * kp,
            l_tot * kp,
        ));
    }
    Ok(EigenSet {
        lambda: roots,
        coeffs,
        scaled_lengths: scaled,
        regions: regs,
    })
}

fn bisect(mut a: f64, mut b: f64, mut fa: f64, regs: &[Region; 3]) -> f64 {
    while (b - a) > 1e-13 * b {
        let m = 0.5 * (a + b);
        let fm = mismatch(m, regs);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // secant refinement inside the final bracket
    let fb = mismatch(b, regs);
    if fb != fa {
        let x = b - fb * (b - a) / (fb - fa);
        if x > a && x < b {
            return x;
        }
    }
    0.5 * (a + b)
}

fn mode_coefficients(lambda: f64, regs: &[Region; 3]) -> [f64; 5] {
    let states = propagate(lambda, regs);
    let mut norm = 0.0;
    let mut global = [(0.0, 0.0); 3];
    for (i, r) in regs.iter().enumerate() {
        let (psi, q) = states[i];
        let k = wavenumber(lambda, r);
        let (p, qq) = (psi, q / (r.diff * k));
        let l = r.len;
        let s2 = (2.0 * k * l).sin() / (4.0 * k);
        let sk = (k * l).sin();
        norm += r.eps * (p * p * (0.5 * l + s2) + qq * qq * (0.5 * l - s2) + p * qq * sk * sk / k);
        // local (x - start) form to global x form
        let (sn, cs) = (k * r.start).sin_cos();
        global[i] = (p * cs - qq * sn, p * sn + qq * cs);
    }
    let scale = 1.0 / norm.sqrt();
    [
        global[0].0 * scale,
        global[1].0 * scale,
        global[1].1 * scale,
        global[2].0 * scale,
        global[2].1 * scale,
    ]
}

/// Electrolyte response of the whole cell at a setpoint.
#[derive(Debug, Clone)]
pub struct ElectrolyteTf {
    pub neg: ElectrodeTf,
    pub pos: ElectrodeTf,
    pub eigen: EigenSet,
    kappa_sep: f64,
    transference: f64,
    boundaries: [f64; 4],
}

impl ElectrolyteTf {
    pub fn new(params: &CellParams, setpoint: &Setpoint, modes: usize) -> Result<Self> {
        Ok(Self {
            neg: ElectrodeTf::new(params, setpoint, Electrode::Negative),
            pos: ElectrodeTf::new(params, setpoint, Electrode::Positive),
            eigen: electrolyte_eigenvalues(params, modes)?,
            kappa_sep: setpoint.kappa_sep,
            transference: params.transference,
            boundaries: params.boundaries(),
        })
    }

    pub fn with_eigen(params: &CellParams, setpoint: &Setpoint, eigen: EigenSet) -> Self {
        Self {
            neg: ElectrodeTf::new(params, setpoint, Electrode::Negative),
            pos: ElectrodeTf::new(params, setpoint, Electrode::Positive),
            eigen,
            kappa_sep: setpoint.kappa_sep,
            transference: params.transference,
            boundaries: params.boundaries(),
        }
    }

    /// Linear (ohmic) part of the electrolyte potential at `x`, relative to
    /// `x = 0`, per applied current.
    pub fn potential(&self, x: f64, s: Complex64) -> Complex64 {
        let [_, a, b, l_tot] = self.boundaries;
        let area = self.neg.plate_area;
        let nu_n = self.neg.nu(s);
        if x <= a {
            return self.neg.electrolyte_drop(x / a, nu_n);
        }
        let sep_end = self.neg.electrolyte_drop(1.0, nu_n) - (b - a) / (area * self.kappa_sep);
        if x <= b {
            return self.neg.electrolyte_drop(1.0, nu_n) - (x - a) / (area * self.kappa_sep);
        }
        // positive electrode, w measured from its collector
        let w = ((l_tot - x) / self.pos.thickness).clamp(0.0, 1.0);
        let nu_p = self.pos.nu(s);
        sep_end - (self.pos.electrolyte_drop(w, nu_p) - self.pos.electrolyte_drop(1.0, nu_p))
    }

    /// Modal source of the concentration equation for each mode:
    /// `(1 - t+) int a_s j psi dx` per applied current.
    pub fn modal_sources(&self, s: Complex64) -> Vec<Complex64> {
        let l_tot = self.boundaries[3];
        let nu_n = self.neg.nu(s);
        let nu_p = self.pos.nu(s);
        (0..self.eigen.len())
            .map(|k| {
                let (ln, _, _) = self.eigen.scaled_lengths[k];
                let lp = self.eigen.scaled_lengths[k].2 - self.eigen.scaled_lengths[k].1;
                let jn = self.electrode_projection(&self.neg, nu_n, ln, self.eigen.coeffs[k][0]);
                let psi_end = self.eigen.psi(k, l_tot);
                let jp = self.electrode_projection(&self.pos, nu_p, lp, psi_end);
                (1.0 - self.transference) * (jn + Electrode::Positive.sign() * jp)
            })
            .collect()
    }

    /// `int_0^1 a_s L j(z) psi(z) dz` for `psi = amp cos(lhat z)` with `z`
    /// measured from the collector.
    fn electrode_projection(
        &self,
        e: &ElectrodeTf,
        nu: Complex64,
        lhat: f64,
        amp: f64,
    ) -> Complex64 {
        let (sig, kap) = (e.sigma_eff, e.kappa_eff);
        let (sn, cs) = lhat.sin_cos();
        let edge = lhat * sn * (sig * nu_cosh_over_sinh(1.0, nu) + kap * nu_cosh_over_sinh(0.0, nu));
        let interior = nu * nu * (sig * cs + kap);
        amp * (edge + interior) / (e.faraday * e.plate_area * (sig + kap) * (lhat * lhat + nu * nu))
    }

    /// Debiased electrolyte concentration at `x` per applied current.
    pub fn concentration(&self, x: f64, s: Complex64) -> Complex64 {
        self.concentration_with_sources(x, s, &self.modal_sources(s))
    }

    pub(crate) fn concentration_with_sources(
        &self,
        x: f64,
        s: Complex64,
        sources: &[Complex64],
    ) -> Complex64 {
        sources
            .iter()
            .enumerate()
            .map(|(k, j)| self.eigen.psi(k, x) * j / (s + self.eigen.lambda[k]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_cell() -> CellParams {
        let mut p = CellParams::example();
        p.sep.porosity = p.neg.porosity;
        p.pos.porosity = p.neg.porosity;
        p.sep.bruggeman = p.neg.bruggeman;
        p.pos.bruggeman = p.neg.bruggeman;
        p
    }

    #[test]
    fn homogeneous_cell_has_cosine_modes() {
        let p = uniform_cell();
        let eig = electrolyte_eigenvalues(&p, 8).unwrap();
        let l = p.total_thickness();
        let d = p.electrolyte_diffusivity * p.neg.porosity.powf(p.neg.bruggeman);
        for (k, lam) in eig.lambda.iter().enumerate() {
            let oracle = ((k + 1) as f64 * std::f64::consts::PI / l).powi(2) * d / p.neg.porosity;
            assert!((lam - oracle).abs() <= 1e-8 * oracle, "{k}: {lam} vs {oracle}");
        }
    }

    #[test]
    fn heterogeneous_roots_are_accurate_and_ordered() {
        let p = CellParams::example();
        let eig = electrolyte_eigenvalues(&p, 12).unwrap();
        for k in 0..eig.len() {
            assert!(eig.determinant_residual(k) < 1e-9, "{}", eig.determinant_residual(k));
            assert!(eig.continuity_residual(k) < 1e-10, "{}", eig.continuity_residual(k));
            assert!(eig.lambda[k] > 0.0);
        }
        assert!(eig.lambda.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let p = CellParams::example();
        let eig = electrolyte_eigenvalues(&p, 5).unwrap();
        let n = 20000;
        let l = p.total_thickness();
        let h = l / n as f64;
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for m in 0..n {
                    let x = (m as f64 + 0.5) * h;
                    let (eps, _) = p.electrolyte_props_at(x);
                    acc += eps * eig.psi(i, x) * eig.psi(j, x) * h;
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-3, "{i},{j}: {acc}");
            }
        }
    }

    fn sample_s() -> Vec<Complex64> {
        vec![
            Complex64::new(1e-4, 0.0),
            Complex64::new(0.0, 1e-3),
            Complex64::new(0.02, 0.5),
            Complex64::new(0.0, 30.0),
            Complex64::new(5.0, -2.0),
        ]
    }

    fn expanded_positive_phie(tf: &ElectrolyteTf, p: &CellParams, x: f64, s: Complex64) -> Complex64 {
        let area = p.plate_area;
        let (ln, ls, lp) = (p.neg.thickness, p.sep.thickness, p.pos.thickness);
        let lt = ln + ls + lp;
        let (sn, kn) = (tf.neg.sigma_eff, tf.neg.kappa_eff);
        let (sp, kp) = (tf.pos.sigma_eff, tf.pos.kappa_eff);
        let nn = tf.neg.nu(s);
        let np = tf.pos.nu(s);
        let den = area * (kp + sp) * np.sinh() * np;
        -ls / (area * tf.kappa_sep)
            + ln * ((1.0 - sn / kn) * (nn / 2.0).tanh() - nn) / (area * (kn + sn) * nn)
            - lp * (1.0 + sp / kp * np.cosh()) / den
            + lp * ((ln + ls - x) * np / lp).cosh() / den
            + lp * (sp / kp * ((lt - x) * np / lp).cosh()) / den
            + (ln + ls - x) / (area * (sp + kp))
    }

    fn cell_tf(modes: usize) -> (CellParams, ElectrolyteTf) {
        let p = CellParams::example();
        let sp = p.setpoint(0.5, p.temperature_ref).unwrap();
        let tf = ElectrolyteTf::new(&p, &sp, modes).unwrap();
        (p, tf)
    }

    #[test]
    fn phie_positive_region_matches_second_transcription() {
        let (p, tf) = cell_tf(1);
        let [_, _, b, lt] = p.boundaries();
        for s in sample_s() {
            for f in [0.0, 0.1, 0.37, 0.8, 1.0] {
                let x = b + f * (lt - b);
                let ours = tf.potential(x, s);
                let other = expanded_positive_phie(&tf, &p, x, s);
                assert!((ours - other).norm() <= 1e-12 * other.norm().max(1e-300), "{s} {f}: {ours} {other}");
            }
        }
    }

    #[test]
    fn phie_reference_and_interfaces() {
        let (p, tf) = cell_tf(1);
        let [_, a, b, _] = p.boundaries();
        for s in sample_s() {
            assert_eq!(tf.potential(0.0, s).norm(), 0.0);
            for x in [a, b] {
                let lhs = tf.potential(x * (1.0 - 1e-12), s);
                let rhs = tf.potential(x * (1.0 + 1e-12), s);
                assert!(lhs.is_finite() && rhs.is_finite());
                assert!((lhs - rhs).norm() < 1e-9 * lhs.norm());
            }
        }
    }

    #[test]
    fn phie_separator_is_linear() {
        let (p, tf) = cell_tf(1);
        let [_, a, b, _] = p.boundaries();
        let s = Complex64::new(0.0, 0.3);
        let slope = (tf.potential(b, s) - tf.potential(a, s)) / (b - a);
        let expect = -1.0 / (p.plate_area * tf.kappa_sep);
        assert!((slope - expect).norm() < 1e-9 * expect.abs());
    }

    fn integrate_eps(p: &CellParams, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let [x0, a, b, l] = p.boundaries();
        let mut acc = Complex64::new(0.0, 0.0);
        for (lo, hi) in [(x0, a), (a, b), (b, l)] {
            let n = 2000;
            let h = (hi - lo) / n as f64;
            for m in 0..n {
                let x = lo + (m as f64 + 0.5) * h;
                acc += p.electrolyte_props_at(x).0 * f(x) * h;
            }
        }
        acc
    }

    #[test]
    fn ce_conserves_lithium() {
        let (p, tf) = cell_tf(10);
        for s in sample_s() {
            let total = integrate_eps(&p, |x| tf.concentration(x, s));
            let scale = integrate_eps(&p, |x| tf.concentration(x, s).norm().into());
            assert!(total.norm() < 1e-6 * scale.re, "{s}: {total} vs {}", scale.re);
        }
    }

    #[test]
    fn ce_truncation_converges() {
        let p = CellParams::example();
        let sp = p.setpoint(0.5, p.temperature_ref).unwrap();
        let eig = electrolyte_eigenvalues(&p, 32).unwrap();
        let with = |n: usize| {
            let mut e = eig.clone();
            e.lambda.truncate(n);
            e.coeffs.truncate(n);
            e.scaled_lengths.truncate(n);
            ElectrolyteTf::with_eigen(&p, &sp, e)
        };
        let s = Complex64::new(0.0, 1e-2);
        for x in [0.0, p.total_thickness()] {
            let mut last = f64::INFINITY;
            for n in [4, 8, 16] {
                let gap = (with(n).concentration(x, s) - with(2 * n).concentration(x, s)).norm();
                assert!(gap < last, "{n}: {gap} {last}");
                last = gap;
            }
        }
    }

    #[test]
    fn ce_vanishes_at_high_frequency() {
        let (p, tf) = cell_tf(10);
        let l = p.total_thickness();
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let v = tf.concentration(l, Complex64::new(10f64.powi(k), 0.0)).norm();
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-6 * tf.concentration(l, Complex64::new(1e-3, 0.0)).norm());
    }

    #[test]
    fn ce_matches_finite_difference_solution() {
        // independent check: solve s eps c = (D c')' + (1 - t+) a_s j on a
        // fine finite-volume grid with zero-flux ends
        let (p, tf) = cell_tf(80);
        let [_, a, b, l] = p.boundaries();
        let n = 8000;
        let h = l / n as f64;
        let centre = |i: usize| (i as f64 + 0.5) * h;
        let s = Complex64::new(0.0, 2e-3);
        let t = 1.0 - p.transference;
        let source = |x: f64| -> Complex64 {
            if x < a {
                t * tf.neg.area_density * tf.neg.flux(x / a, s)
            } else if x > b {
                -t * tf.pos.area_density * tf.pos.flux((l - x) / tf.pos.thickness, s)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let props: Vec<(f64, f64)> = (0..n).map(|i| p.electrolyte_props_at(centre(i))).collect();
        let face = |i: usize| {
            let (di, dj) = (props[i].1, props[i + 1].1);
            2.0 * di * dj / (di + dj) / h
        };
        let zero = Complex64::new(0.0, 0.0);
        let mut lower = vec![zero; n];
        let mut diag = vec![zero; n];
        let mut upper = vec![zero; n];
        let mut rhs = vec![zero; n];
        for i in 0..n {
            diag[i] = s * props[i].0 * h;
            if i > 0 {
                let f = face(i - 1);
                diag[i] += f;
                lower[i] = Complex64::new(-f, 0.0);
            }
            if i + 1 < n {
                let f = face(i);
                diag[i] += f;
                upper[i] = Complex64::new(-f, 0.0);
            }
            rhs[i] = source(centre(i)) * h;
        }
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] = rhs[i] - w * rhs[i - 1];
        }
        let mut c = vec![zero; n];
        c[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            c[i] = (rhs[i] - upper[i] * c[i + 1]) / diag[i];
        }
        // midpoint quadrature leaves a tiny net source; drop its zero mode
        let mass: Complex64 = (0..n).map(|i| props[i].0 * c[i]).sum();
        let volume: f64 = props.iter().map(|q| q.0).sum();
        let c: Vec<Complex64> = c.iter().map(|v| v - mass / volume).collect();
        for x in [0.2 * a, 0.5 * (a + b), b + 0.6 * (l - b)] {
            let i = ((x / h) as usize).min(n - 1);
            let modal = tf.concentration(centre(i), s);
            assert!((modal - c[i]).norm() < 1e-3 * c[i].norm(), "{x}: {modal} vs {}", c[i]);
        }
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(electrolyte_eigenvalues(&CellParams::example(), 0).is_err());
    }
}
