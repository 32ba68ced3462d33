//! Drive-cycle simulation over a blended model grid.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use super::blend::BlendedGrid;
use super::cycle::{power_to_current, CycleSignal, DriveCycle, PackConfig};
use super::linear::{step, LinearState};
use super::voltage::{reconstruct_outputs, reconstruct_voltage, VoltageContext, FLAG_VOLTAGE_LIMIT};
use crate::cellparams::CellParams;
use crate::error::{Error, Result};
use crate::tfgen::OutputLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    /// V
    pub v_min: f64,
    /// V
    pub v_max: f64,
    /// Used only for power-specified cycles.
    pub pack: PackConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            v_min: 2.5,
            v_max: 4.2,
            pack: PackConfig::default(),
        }
    }
}

/// Per-step record of a simulation.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub labels: Vec<OutputLabel>,
    pub t_s: f64,
    /// s
    pub time: Vec<f64>,
    /// A
    pub current: Vec<f64>,
    /// V
    pub voltage: Vec<f64>,
    /// Bulk soc at the start of each step.
    pub soc: Vec<f64>,
    pub flags: Vec<u8>,
    /// Modal state at the start of each step.
    pub states: Vec<DVector<f64>>,
    /// Debiased linear outputs.
    pub linear: Vec<DVector<f64>>,
    /// Physical outputs, see [`reconstruct_outputs`].
    pub outputs: Vec<Vec<f64>>,
    pub final_soc: f64,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Steps with any flag set.
    pub fn flagged(&self) -> usize {
        self.flags.iter().filter(|f| **f != 0).count()
    }

    /// `sum u V T_s`, J.
    pub fn energy(&self) -> f64 {
        self.current
            .iter()
            .zip(&self.voltage)
            .map(|(u, v)| u * v * self.t_s)
            .sum()
    }

    /// One row per step: time, current, voltage, soc, flags, then every
    /// labelled output. Floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,current_a,voltage_v,soc,flags");
        for l in &self.labels {
            out.push(',');
            out.push_str(&l.to_string());
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                self.time[k], self.current[k], self.voltage[k], self.soc[k], self.flags[k]
            );
            for v in &self.outputs[k] {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Simulate `cycle` from rest at `soc_init`.
///
/// The cycle must already sit on the model period. Each step re-blends the
/// grid at the current coulomb-counted soc; power cycles convert to current
/// with the previous step's voltage.
pub fn run_drive_cycle(
    grid: &BlendedGrid,
    params: &CellParams,
    cycle: &DriveCycle,
    soc_init: f64,
    temp: f64,
    config: &SimulationConfig,
) -> Result<SimulationTrace> {
    let t_s = grid.t_s();
    if !cycle.is_uniform(t_s) {
        return Err(Error::invalid(
            "cycle",
            format!("samples are not on the model period {t_s} s; resample first"),
        ));
    }
    if matches!(cycle.signal, CycleSignal::Power(_)) {
        config.pack.validate()?;
    }
    let labels = grid.labels().to_vec();
    let ctx = VoltageContext::new(params, &labels, soc_init, temp)?;
    let coulombs = 3600.0 * params.capacity_ah;
    let n = cycle.len();

    let mut trace = SimulationTrace {
        labels,
        t_s,
        time: cycle.time.clone(),
        current: Vec::with_capacity(n),
        voltage: Vec::with_capacity(n),
        soc: Vec::with_capacity(n),
        flags: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        linear: Vec::with_capacity(n),
        outputs: Vec::with_capacity(n),
        final_soc: soc_init,
    };
    let mut model = grid.blend(soc_init, temp)?;
    let mut state = LinearState::zeros(grid.order());
    let mut soc = soc_init;
    let mut last_v = params.ocv(soc_init);
    for &demand in cycle.signal.values() {
        grid.blend_into(soc, temp, &mut model)?;
        let u = match cycle.signal {
            CycleSignal::Current(_) => demand,
            CycleSignal::Power(_) => power_to_current(demand, &config.pack, last_v)?,
        };
        let (next, y) = step(&model, &state, u);
        let v = reconstruct_voltage(&y, &ctx);
        let mut flags = v.flags;
        if !(v.voltage >= config.v_min && v.voltage <= config.v_max) {
            flags |= FLAG_VOLTAGE_LIMIT;
        }
        trace.current.push(u);
        trace.voltage.push(v.voltage);
        trace.soc.push(soc);
        trace.flags.push(flags);
        trace.outputs.push(reconstruct_outputs(&y, &trace.labels, &ctx));
        trace.states.push(std::mem::replace(&mut state, next).x);
        trace.linear.push(y);
        last_v = v.voltage;
        soc -= u * t_s / coulombs;
    }
    trace.final_soc = soc;
    Ok(trace)
}
