//! One-at-a-time sensitivity sweep of the realisation settings.

use super::report::{BenchReport, CaseResult, MIN_REPS};
use super::timing::{machine_descriptor, time_case};
use crate::cellparams::CellParams;
use crate::error::{Error, Result};
use crate::realisation::{realise_setpoint, RealisationConfig};
use crate::ExecMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Electrolyte output locations `S_e`.
    ElectrolytePoints,
    /// Electrode output locations `S_s` per electrode.
    ElectrodePoints,
    /// Hankel block columns `H_m`.
    HankelCols,
    /// Hankel block rows `H_n`.
    HankelRows,
    /// Transfer-function sample length `T_len`, hours.
    SampleLength,
    /// Sampling rate `F_s`, with the model period kept at `1 / F_s`.
    SampleRate,
    /// Model order `M`.
    Order,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 7] = [
        SweepVariable::ElectrolytePoints,
        SweepVariable::ElectrodePoints,
        SweepVariable::HankelCols,
        SweepVariable::HankelRows,
        SweepVariable::SampleLength,
        SweepVariable::SampleRate,
        SweepVariable::Order,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::ElectrolytePoints => "S_e",
            SweepVariable::ElectrodePoints => "S_s",
            SweepVariable::HankelCols => "H_m",
            SweepVariable::HankelRows => "H_n",
            SweepVariable::SampleLength => "T_len",
            SweepVariable::SampleRate => "F_s",
            SweepVariable::Order => "M",
        }
    }

    /// `base` with this variable scaled by `factor`, and the new value as
    /// text. Counts round to the nearest integer, at least 1.
    pub fn apply(self, base: &RealisationConfig, factor: f64) -> (RealisationConfig, String) {
        let scale = |n: usize| ((n as f64 * factor).round() as usize).max(1);
        let mut c = base.clone();
        let value = match self {
            SweepVariable::ElectrolytePoints => {
                c.electrolyte_points = scale(base.electrolyte_points);
                c.electrolyte_points.to_string()
            }
            SweepVariable::ElectrodePoints => {
                c.electrode_points = scale(base.electrode_points);
                c.electrode_points.to_string()
            }
            SweepVariable::HankelCols => {
                c.hankel_cols = scale(base.hankel_cols);
                c.hankel_cols.to_string()
            }
            SweepVariable::HankelRows => {
                c.hankel_rows = scale(base.hankel_rows);
                c.hankel_rows.to_string()
            }
            SweepVariable::SampleLength => {
                c.tf_sample_len = base.tf_sample_len * factor;
                format!("{}", c.tf_sample_len)
            }
            SweepVariable::SampleRate => {
                c.sample_rate = base.sample_rate * factor;
                c.system_period = 1.0 / c.sample_rate;
                format!("{}", c.sample_rate)
            }
            SweepVariable::Order => {
                c.order = scale(base.order);
                c.order.to_string()
            }
        };
        (c, value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub reps: usize,
    pub soc: f64,
    /// K
    pub temp: f64,
    /// Scale factors for the lower and upper bound.
    pub bounds: (f64, f64),
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            reps: MIN_REPS,
            soc: 0.75,
            temp: 298.15,
            bounds: (0.5, 1.5),
        }
    }
}

/// Baseline plus a lower and upper case per variable, in run order.
pub fn sweep_cases(base: &RealisationConfig, opts: &SweepOptions) -> Vec<(CaseResult, RealisationConfig)> {
    let mut out = vec![(CaseResult::new("baseline", "baseline", "default"), base.clone())];
    for v in SweepVariable::ALL {
        for (bound, f) in [("lower", opts.bounds.0), ("upper", opts.bounds.1)] {
            let (cfg, value) = v.apply(base, f);
            out.push((CaseResult::new(format!("{}={value}", v.name()), v.name(), bound), cfg));
        }
    }
    out
}

/// Time `realise_setpoint` for every sweep case, sequentially.
pub fn sensitivity_sweep(params: &CellParams, base: &RealisationConfig, opts: &SweepOptions) -> Result<BenchReport> {
    if opts.reps < MIN_REPS {
        return Err(Error::Config(format!(
            "reps: at least {MIN_REPS} repetitions are required, got {}",
            opts.reps
        )));
    }
    base.validate()?;
    params.setpoint(opts.soc, opts.temp)?;
    let cases = sweep_cases(base, opts)
        .into_iter()
        .map(|(case, cfg)| {
            log::info!("sweep case {}", case.case);
            time_case(case, opts.reps, || {
                realise_setpoint(params, &cfg, opts.soc, opts.temp, ExecMode::Sequential)
            })
        })
        .collect();
    Ok(BenchReport {
        title: format!(
            "sensitivity sweep at soc={} T={} K, bounds x{} / x{}",
            opts.soc, opts.temp, opts.bounds.0, opts.bounds.1
        ),
        machine: machine_descriptor(),
        cases,
    })
}
