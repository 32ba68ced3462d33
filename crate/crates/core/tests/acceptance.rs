//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Run with `cargo test -p cidra-core --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cidra_core::cellparams::{CellParams, Electrode};
use cidra_core::harness::{sensitivity_sweep, SweepOptions};
use cidra_core::realisation::pipeline::sample_impulse;
use cidra_core::realisation::{
    bilinear_grid, build_hankel, dense_svd, ho_kalman, impulse_from_spectrum, realise_grid, spectral_radius,
    stabilise, truncated_svd, HankelOperator, MarkovSequence, RealisationConfig, SvdStrategy,
};
use cidra_core::simulate::{run_drive_cycle, BlendedGrid, DriveCycle, SimulationConfig};
use cidra_core::tfgen::{electrolyte_eigenvalues, ElectrodeTf, TfRequest};
use cidra_core::ExecMode;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Excluded(String),
}

use Outcome::*;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

struct Oracle {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DMatrix<f64>,
    d: DVector<f64>,
}

impl Oracle {
    /// Order 5, 8 outputs: a damped rotation and three real poles under a
    /// random similarity.
    fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, th) = (rng.gen_range(0.6..0.9), rng.gen_range(0.2..1.2));
        let mut core = DMatrix::zeros(5, 5);
        core[(0, 0)] = r * f64::cos(th);
        core[(0, 1)] = -r * f64::sin(th);
        core[(1, 0)] = r * f64::sin(th);
        core[(1, 1)] = r * f64::cos(th);
        core[(2, 2)] = rng.gen_range(0.3..0.9);
        core[(3, 3)] = rng.gen_range(-0.8..-0.2);
        core[(4, 4)] = rng.gen_range(0.1..0.5);
        let t = DMatrix::identity(5, 5) + DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-0.3..0.3));
        let a = &t * core * t.clone().try_inverse().unwrap();
        Self {
            a,
            b: DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0)),
            c: DMatrix::from_fn(8, 5, |_, _| rng.gen_range(-1.0..1.0)),
            d: DVector::from_fn(8, |_, _| rng.gen_range(-1.0..1.0)),
        }
    }

    /// `g[0] = D`, `g[t] = C A^(t-1) B`.
    fn markov(&self, len: usize) -> MarkovSequence {
        let mut rows: Vec<Vec<f64>> = (0..8).map(|_| Vec::with_capacity(len)).collect();
        let mut x = self.b.clone();
        for t in 0..len {
            let y = if t == 0 { self.d.clone() } else { &self.c * &x };
            if t > 0 {
                x = &self.a * x;
            }
            for (o, row) in rows.iter_mut().enumerate() {
                row.push(y[o]);
            }
        }
        MarkovSequence::from_rows(rows).unwrap()
    }

    /// `D + C (zI - A)^-1 B` at `z = (1 + s T/2) / (1 - s T/2)`.
    fn response(&self, s: Complex64, t_s: f64) -> Vec<Complex64> {
        let z = if s.is_finite() {
            (1.0 + s * t_s / 2.0) / (1.0 - s * t_s / 2.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        let n = self.a.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::from_fn(n, |i, _| Complex64::new(self.b[i], 0.0));
        let x = m.lu().solve(&rhs).unwrap();
        (0..self.c.nrows())
            .map(|o| (0..n).map(|k| x[k] * self.c[(o, k)]).sum::<Complex64>() + self.d[o])
            .collect()
    }
}

fn rel_l2(got: &MarkovSequence, want: &MarkovSequence, range: std::ops::Range<usize>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for o in 0..want.outputs() {
        for t in range.clone() {
            num += (got.get(o, t) - want.get(o, t)).powi(2);
            den += want.get(o, t).powi(2);
        }
    }
    (num / den).sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sys = Oracle::seeded(1);
    let g = sys.markov(200);
    let (h, hs) = build_hankel(&g, 60, 60).unwrap();
    let svd = dense_svd(&h, 5).unwrap();
    let r = ho_kalman(&svd, &hs, &g.feedthrough()).unwrap();
    let mk = r.markov(100);
    let (mut num, mut den) = (0.0, 0.0);
    for o in 0..8 {
        for t in 1..=100 {
            num += (mk[(o, t - 1)] - g.get(o, t)).powi(2);
            den += g.get(o, t).powi(2);
        }
    }
    let err = (num / den).sqrt();
    let secs = start.elapsed().as_secs_f64();
    check(
        err <= 1e-8 && secs < 1.0,
        format!("Ho-Kalman oracle: relative L2 error {err:.2e} over t <= 100, {secs:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let sys = Oracle::seeded(1);
    let (t_s, n) = (0.25, 4096);
    let grid = bilinear_grid(t_s, n);
    let mut rows: Vec<Vec<Complex64>> = (0..8).map(|_| Vec::with_capacity(n)).collect();
    for s in &grid {
        for (o, v) in sys.response(*s, t_s).into_iter().enumerate() {
            rows[o].push(v);
        }
    }
    let got = impulse_from_spectrum(&rows, ExecMode::Parallel).unwrap();
    let err = rel_l2(&got, &sys.markov(n / 4), 0..n / 4);
    check(
        err <= 1e-8,
        format!("bilinear/IFFT round trip: relative L2 error {err:.2e} for t < N/4, N = {n}"),
    )
}

/// Composite Simpson over `[0, 1]` with `n` (even) intervals.
fn simpson(n: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(k as f64 * h) * w;
    }
    acc * h / 3.0
}

fn criterion_3() -> Outcome {
    let p = CellParams::example();
    let sp = p.setpoint(0.5, p.temperature_ref).unwrap();
    let mut worst = 0.0_f64;
    for e in Electrode::BOTH {
        let tf = ElectrodeTf::new(&p, &sp, e);
        let expect = tf.uniform_flux();
        for k in 0..64 {
            let w = 10f64.powf(-5.0 + 7.0 * k as f64 / 63.0);
            let s = Complex64::new(0.0, w);
            let integral = simpson(4096, |z| tf.flux(z, s));
            worst = worst.max((integral - expect).norm() / expect);
        }
    }
    check(
        worst <= 1e-8,
        format!("charge conservation: worst relative error {worst:.2e} over 64 frequencies, both electrodes"),
    )
}

fn criterion_4() -> Outcome {
    let mut u = CellParams::example();
    u.sep.porosity = u.neg.porosity;
    u.pos.porosity = u.neg.porosity;
    u.sep.bruggeman = u.neg.bruggeman;
    u.pos.bruggeman = u.neg.bruggeman;
    let eig = electrolyte_eigenvalues(&u, 8).unwrap();
    let l = u.total_thickness();
    let d = u.electrolyte_diffusivity * u.neg.porosity.powf(u.neg.bruggeman);
    let mut worst = 0.0_f64;
    for (k, lam) in eig.lambda.iter().enumerate() {
        let oracle = ((k + 1) as f64 * PI / l).powi(2) * d / u.neg.porosity;
        worst = worst.max((lam - oracle).abs() / oracle);
    }
    let p = CellParams::example();
    let het = electrolyte_eigenvalues(&p, 10).unwrap();
    let resid = (0..het.len()).map(|k| het.determinant_residual(k)).fold(0.0, f64::max);
    check(
        worst <= 1e-8 && resid < 1e-9,
        format!("eigenproblem: uniform-cell worst relative error {worst:.2e} (k = 1..8), bundled-cell determinant residual {resid:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_radius, mut worst_match) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let target = rng.gen_range(1.01..1.99);
        let a = &raw * (target / spectral_radius(&raw));
        let s = stabilise(&a).unwrap();
        worst_radius = worst_radius.max(spectral_radius(&s));
        let got: Vec<Complex64> = s.complex_eigenvalues().iter().copied().collect();
        for l in a.complex_eigenvalues().iter() {
            let want = if l.norm() < 1.0 { *l } else { 1.0 / l.conj() };
            let d = got.iter().map(|g| (g - want).norm()).fold(f64::INFINITY, f64::min);
            worst_match = worst_match.max(d);
        }
    }
    check(
        worst_radius <= 1.0 - 1e-12 && worst_match < 1e-8,
        format!(
            "stabilisation: 100 matrices, max radius after {worst_radius:.12}, worst pole mismatch against reflection {worst_match:.2e}"
        ),
    )
}

fn desk_config() -> RealisationConfig {
    RealisationConfig {
        hankel_rows: 400,
        hankel_cols: 400,
        tf_sample_len: 1.0,
        order: 6,
        ..Default::default()
    }
}

fn criterion_6() -> Outcome {
    let p = CellParams::example();
    let cfg = desk_config();
    let sp = p.setpoint(0.5, p.temperature_ref).unwrap();
    let req = TfRequest::uniform(&p, sp, cfg.electrode_points, cfg.electrolyte_points, cfg.modes);
    let (g, _, labels) = sample_impulse(&p, &cfg, &req, ExecMode::Parallel).unwrap();
    let g = MarkovSequence::from_rows(vec![g.row(0).to_vec()]).unwrap();
    let op = HankelOperator::new(&g, 400, 400, ExecMode::Parallel).unwrap();
    let it = truncated_svd(&op, 8, SvdStrategy::Iterative).unwrap();
    let (h, _) = build_hankel(&g, 400, 400).unwrap();
    let de = dense_svd(&h, 8).unwrap();
    let worst = (0..8)
        .map(|i| (it.sigma[i] - de.sigma[i]).abs() / de.sigma[i])
        .fold(0.0, f64::max);
    check(
        worst <= 1e-9,
        format!(
            "truncated vs dense SVD: worst relative gap {worst:.2e} over top 8 of a 400x400 Hankel ({} response)",
            labels[0]
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let p = CellParams::example();
    let cfg = desk_config();
    let grid = match realise_grid(&p, &cfg, ExecMode::Parallel) {
        Ok(g) => g,
        Err(e) => return Fail(format!("desk pipeline: realisation failed: {e}")),
    };
    let recon = grid
        .reports
        .iter()
        .flatten()
        .map(|r| r.reconstruction_error)
        .fold(0.0, f64::max);
    let blended = BlendedGrid::new(&grid).unwrap();
    let cycle = DriveCycle::synthetic().resample(cfg.system_period).unwrap();
    let soc0 = 0.75;
    let trace = run_drive_cycle(&blended, &p, &cycle, soc0, p.temperature_ref, &SimulationConfig::default()).unwrap();
    let (vmin, vmax) = trace
        .voltage
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ocv = p.ocv(soc0);
    let rest: Vec<usize> = (0..trace.len()).take_while(|&k| trace.current[k] == 0.0).collect();
    let rest_exact = !rest.is_empty() && rest.iter().all(|&k| trace.voltage[k] == ocv);
    let secs = start.elapsed().as_secs_f64();
    check(
        grid.len() == 5
            && trace.len() == 7200
            && vmin >= 2.5
            && vmax <= 4.2
            && trace.flagged() == 0
            && rest_exact
            && recon <= 0.05
            && secs < 120.0,
        format!(
            "desk pipeline: 5 setpoints, {} steps, V in [{vmin:.4}, {vmax:.4}], {} flagged, {} rest steps at OCV exactly: {rest_exact}, max reconstruction error {:.3}%, {secs:.1} s",
            trace.len(),
            trace.flagged(),
            rest.len(),
            100.0 * recon
        ),
    )
}

fn criterion_8() -> Outcome {
    let p = CellParams::example();
    let base = RealisationConfig::default();
    let report = sensitivity_sweep(&p, &base, &SweepOptions::default()).unwrap();
    let rank = report.sensitivity_ranking();
    let names: Vec<&str> = rank.iter().map(|(v, _)| v.as_str()).collect();
    let n = names.len();
    let top = n == 7 && names[..2].contains(&"H_n") && names[..2].contains(&"H_m");
    let bottom = n == 7 && names[n - 2..].contains(&"T_len");
    let order = rank
        .iter()
        .map(|(v, d)| format!("{v} {d:.0}%"))
        .collect::<Vec<_>>()
        .join(", ");
    check(top && bottom, format!("sensitivity ranking at the default configuration: {order}"))
}

fn criterion_9() -> Outcome {
    Excluded(
        "external-solver RMSE, laboratory data comparisons and hardware-specific formation times are not reproducible here"
            .into(),
    )
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (k, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &k.to_string()) {
            continue;
        }
        let line = match f() {
            Pass(d) => format!("criterion {k}: PASS  {d}"),
            Fail(d) => {
                failed += 1;
                format!("criterion {k}: FAIL  {d}")
            }
            Excluded(d) => format!("criterion {k}: EXCLUDED  {d}"),
        };
        println!("{line}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
