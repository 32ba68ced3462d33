//! Setpoint and grid realisation.

use std::path::Path;
use std::time::{Duration, Instant};

use log::info;
use num_complex::Complex64;

use super::config::{RealisationConfig, SvdStrategy};
use super::grid::bilinear_grid;
use super::hankel::{build_hankel, HankelOperator};
use super::ho_kalman::{ho_kalman, Realisation};
use super::impulse::{impulse_from_spectrum, MarkovSequence};
use super::model::{StateSpaceModel, MODEL_EXTENSION};
use super::stabilise::{spectral_radius, stabilise};
use super::svd::{dense_svd, truncated_svd};
use crate::cellparams::CellParams;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::tfgen::{assemble_with, SimoEvaluator, TfRequest};

/// Per-setpoint timings and quality figures.
#[derive(Debug, Clone)]
pub struct RealisationReport {
    pub wall_time: Duration,
    /// `sum |G_hat - G|^2 / sum |G|^2` over the first `min(200, H_n)` steps,
    /// before stabilisation.
    pub reconstruction_error: f64,
    pub svd_strategy: SvdStrategy,
    pub lanczos_steps: usize,
    pub radius_before: f64,
    pub radius_after: f64,
    pub singular_values: Vec<f64>,
}

/// Sampled impulse response of the residue-corrected transfer functions at
/// the model period, plus the integrator residues.
pub fn sample_impulse(
    params: &CellParams,
    config: &RealisationConfig,
    req: &TfRequest,
    mode: ExecMode,
) -> Result<(MarkovSequence, Vec<f64>, Vec<crate::tfgen::OutputLabel>)> {
    let q = config.subsample_factor()?;
    let n = config.samples();
    let grid = bilinear_grid(1.0 / config.sample_rate, n);
    let eval = SimoEvaluator::new(params, req)?;
    // only the non-negative half is evaluated; the rest is its mirror
    let half = assemble_with(&eval, &grid[..=n / 2], mode)?;
    let rows: Vec<Vec<Complex64>> = half
        .values
        .iter()
        .map(|row| {
            let mut full = Vec::with_capacity(n);
            full.extend_from_slice(row);
            full[0] = Complex64::new(full[0].re, 0.0);
            full[n / 2] = Complex64::new(full[n / 2].re, 0.0);
            for f in n / 2 + 1..n {
                full.push(row[n - f].conj());
            }
            full
        })
        .collect();
    let g = impulse_from_spectrum(&rows, mode)?.subsample(q);
    Ok((g, half.res0, half.labels))
}

/// Relative squared error of the model's Markov parameters against `g`
/// over `t = 1..=len`.
pub fn reconstruction_error(r: &Realisation, g: &MarkovSequence, len: usize) -> f64 {
    let mk = r.markov(len);
    let (mut num, mut den) = (0.0, 0.0);
    for o in 0..g.outputs() {
        for t in 1..=len {
            let want = g.get(o, t);
            num += (mk[(o, t - 1)] - want).powi(2);
            den += want * want;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn realise_setpoint(
    params: &CellParams,
    config: &RealisationConfig,
    soc: f64,
    temp: f64,
    mode: ExecMode,
) -> Result<(StateSpaceModel, RealisationReport)> {
    let wrap = |e: Error| Error::Setpoint {
        soc,
        temp,
        source: Box::new(e),
    };
    realise_inner(params, config, soc, temp, mode).map_err(wrap)
}

fn realise_inner(
    params: &CellParams,
    config: &RealisationConfig,
    soc: f64,
    temp: f64,
    mode: ExecMode,
) -> Result<(StateSpaceModel, RealisationReport)> {
    let start = Instant::now();
    config.validate()?;
    let setpoint = params.setpoint(soc, temp)?;
    let req = TfRequest::uniform(
        params,
        setpoint,
        config.electrode_points,
        config.electrolyte_points,
        config.modes,
    );
    let (g, res0, labels) = sample_impulse(params, config, &req, mode)?;
    let (rows, cols, m) = (config.hankel_rows, config.hankel_cols, config.order);

    let (svd, raw) = match config.svd_strategy {
        SvdStrategy::Dense => {
            let (h, hs) = build_hankel(&g, rows, cols)?;
            let svd = dense_svd(&h, m)?;
            let raw = ho_kalman(&svd, &hs, &g.feedthrough())?;
            (svd, raw)
        }
        SvdStrategy::Iterative => {
            let op = HankelOperator::new(&g, rows, cols, mode)?;
            let svd = truncated_svd(&op, m, SvdStrategy::Iterative)?;
            let raw = ho_kalman(&svd, &op.shifted(), &g.feedthrough())?;
            (svd, raw)
        }
    };
    let reconstruction = reconstruction_error(&raw, &g, rows.min(200));
    let radius_before = spectral_radius(&raw.a);
    let a = stabilise(&raw.a)?;
    let radius_after = spectral_radius(&a);
    let model = StateSpaceModel {
        a,
        b: raw.b,
        c: raw.c,
        d: raw.d,
        res0: nalgebra::DVector::from_vec(res0),
        labels,
        soc,
        temp,
        t_s: config.system_period,
    };
    model.check()?;
    let report = RealisationReport {
        wall_time: start.elapsed(),
        reconstruction_error: reconstruction,
        svd_strategy: svd.strategy,
        lanczos_steps: svd.steps,
        radius_before,
        radius_after,
        singular_values: svd.sigma.iter().copied().collect(),
    };
    info!(
        "realised soc={soc} T={temp} K in {:.3} s (order {m}, reconstruction {:.2e})",
        report.wall_time.as_secs_f64(),
        reconstruction
    );
    Ok((model, report))
}

/// Models over a (soc, temperature) grid sharing one configuration.
#[derive(Debug, Clone)]
pub struct ModelGrid {
    /// Ascending soc axis.
    pub socs: Vec<f64>,
    /// Ascending temperature axis, K.
    pub temps: Vec<f64>,
    /// `models[ti * socs.len() + si]`.
    pub models: Vec<StateSpaceModel>,
    pub reports: Vec<Option<RealisationReport>>,
}

fn sorted_axis(v: &[f64]) -> Vec<f64> {
    let mut a = v.to_vec();
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

impl ModelGrid {
    pub fn from_models(models: Vec<StateSpaceModel>) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::Config("model grid is empty".into()))?;
        for m in &models {
            m.check()?;
            if m.order() != first.order() || m.t_s != first.t_s || m.labels != first.labels {
                return Err(Error::Config(format!(
                    "model at soc={} T={} disagrees with the grid in order, period or outputs",
                    m.soc, m.temp
                )));
            }
        }
        let socs = sorted_axis(&models.iter().map(|m| m.soc).collect::<Vec<_>>());
        let temps = sorted_axis(&models.iter().map(|m| m.temp).collect::<Vec<_>>());
        let mut slots: Vec<Option<StateSpaceModel>> = vec![None; socs.len() * temps.len()];
        for m in models {
            let si = socs.iter().position(|s| *s == m.soc).unwrap();
            let ti = temps.iter().position(|t| *t == m.temp).unwrap();
            let slot = &mut slots[ti * socs.len() + si];
            if slot.is_some() {
                return Err(Error::Config(format!(
                    "duplicate model for soc={} T={}",
                    m.soc, m.temp
                )));
            }
            *slot = Some(m);
        }
        let n = slots.len();
        let models: Vec<StateSpaceModel> = slots.into_iter().flatten().collect();
        if models.len() != n {
            return Err(Error::Config(
                "model grid is not a full soc x temperature product".into(),
            ));
        }
        Ok(Self {
            socs,
            temps,
            reports: vec![None; n],
            models,
        })
    }

    pub fn model(&self, si: usize, ti: usize) -> &StateSpaceModel {
        &self.models[ti * self.socs.len() + si]
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn total_wall_time(&self) -> Duration {
        self.reports.iter().flatten().map(|r| r.wall_time).sum()
    }

    pub fn save(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        self.models.iter().map(|m| m.save(dir, &m.stem())).collect()
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let p = entry.map_err(|e| Error::io(dir, e))?.path();
            if p.extension().is_some_and(|x| x == MODEL_EXTENSION) {
                paths.push(p);
            }
        }
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Config(format!("no .{MODEL_EXTENSION} files in {}", dir.display())));
        }
        let models = paths
            .iter()
            .map(|p| StateSpaceModel::load(p))
            .collect::<Result<Vec<_>>>()?;
        Self::from_models(models)
    }
}

/// One model per (soc, temperature) pair; stops at the first failure.
pub fn realise_grid(params: &CellParams, config: &RealisationConfig, mode: ExecMode) -> Result<ModelGrid> {
    config.validate()?;
    let mut models = Vec::new();
    let mut reports = Vec::new();
    for &temp in &config.temp_grid {
        for &soc in &config.soc_grid {
            let (m, r) = realise_setpoint(params, config, soc, temp, mode)?;
            models.push(m);
            reports.push(r);
        }
    }
    let mut by_setpoint: Vec<(f64, f64, RealisationReport)> = models
        .iter()
        .zip(reports)
        .map(|(m, r)| (m.soc, m.temp, r))
        .collect();
    let mut grid = ModelGrid::from_models(models)?;
    grid.reports = grid
        .models
        .iter()
        .map(|m| {
            by_setpoint
                .iter()
                .position(|(s, t, _)| *s == m.soc && *t == m.temp)
                .map(|i| by_setpoint.swap_remove(i).2)
        })
        .collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RealisationConfig {
        RealisationConfig {
            hankel_rows: 200,
            hankel_cols: 200,
            tf_sample_len: 0.25,
            order: 5,
            soc_grid: vec![0.8, 0.4],
            ..Default::default()
        }
    }

    #[test]
    fn setpoint_realisation_is_stable_and_faithful() {
        let p = CellParams::example();
        let (m, r) = realise_setpoint(&p, &small(), 0.6, 298.15, ExecMode::Parallel).unwrap();
        assert_eq!(m.order(), 5);
        assert_eq!(m.outputs(), 36);
        assert!(r.reconstruction_error < 0.05, "{}", r.reconstruction_error);
        assert!(r.radius_after <= 1.0);
        assert!(spectral_radius(&m.a) <= 1.0);
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let cse = m.res0.iter().filter(|v| **v != 0.0).count();
        assert_eq!(cse, 8);
    }

    #[test]
    fn strategies_agree() {
        let p = CellParams::example();
        let mut cfg = small();
        let (a, _) = realise_setpoint(&p, &cfg, 0.5, 298.15, ExecMode::Sequential).unwrap();
        cfg.svd_strategy = SvdStrategy::Dense;
        let (b, _) = realise_setpoint(&p, &cfg, 0.5, 298.15, ExecMode::Sequential).unwrap();
        let ra = Realisation { a: a.a, b: a.b, c: a.c, d: a.d };
        let rb = Realisation { a: b.a, b: b.b, c: b.c, d: b.d };
        let (ma, mb) = (ra.markov(50), rb.markov(50));
        assert!((&ma - &mb).norm() <= 1e-6 * mb.norm());
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = CellParams::example();
        let (a, _) = realise_setpoint(&p, &small(), 0.3, 298.15, ExecMode::Sequential).unwrap();
        let (b, _) = realise_setpoint(&p, &small(), 0.3, 298.15, ExecMode::Parallel).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn failures_name_the_setpoint() {
        let p = CellParams::example();
        let mut cfg = small();
        cfg.order = 0;
        let err = realise_setpoint(&p, &cfg, 0.7, 298.15, ExecMode::Sequential).unwrap_err();
        assert!(err.to_string().contains("soc=0.7"));
        assert!(err.is_validation());
        let err = realise_setpoint(&p, &small(), 1.5, 298.15, ExecMode::Sequential).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn grid_round_trip() {
        let p = CellParams::example();
        let grid = realise_grid(&p, &small(), ExecMode::Parallel).unwrap();
        assert_eq!(grid.len(), 2);
        assert_eq!(grid.socs, vec![0.4, 0.8]);
        assert!(grid.reports.iter().all(|r| r.is_some()));
        let (single, _) = realise_setpoint(&p, &small(), 0.8, 298.15, ExecMode::Sequential).unwrap();
        assert_eq!(grid.model(1, 0).to_bytes(), single.to_bytes());

        let dir = tempfile::tempdir().unwrap();
        let paths = grid.save(dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let back = ModelGrid::load(dir.path()).unwrap();
        assert_eq!(back.socs, grid.socs);
        for (a, b) in back.models.iter().zip(&grid.models) {
            assert_eq!(a.to_bytes(), b.to_bytes());
            assert_eq!(a.labels, b.labels);
        }
    }

    #[test]
    fn incomplete_grid_rejected() {
        let p = CellParams::example();
        let grid = realise_grid(&p, &small(), ExecMode::Parallel).unwrap();
        let mut odd = grid.models[0].clone();
        odd.temp = 310.0;
        let err = ModelGrid::from_models(vec![grid.models[0].clone(), grid.models[1].clone(), odd]);
        assert!(err.is_err());
    }
}
