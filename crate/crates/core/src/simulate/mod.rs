//! Drive-cycle simulation of realised models.
//!
//! Grid models are brought to a shared modal form so one state vector can
//! be carried while `A`, `C`, `D` and `res0` are interpolated in soc and
//! temperature. Terminal voltage is rebuilt from the debiased outputs with
//! the nonlinear OCP, Butler-Volmer and electrolyte log terms.

mod blend;
mod cycle;
mod linear;
mod run;
mod voltage;

#[cfg(test)]
mod tests;

pub use blend::{modal_form, BlendedGrid};
pub use cycle::{power_to_current, CycleSignal, DriveCycle, PackConfig, SYNTHETIC_CYCLE};
pub use linear::{simulate_linear, step, LinearModel, LinearState};
pub use run::{run_drive_cycle, SimulationConfig, SimulationTrace};
pub use voltage::{
    reconstruct_outputs, reconstruct_voltage, VoltageBreakdown, VoltageContext, VoltageTaps,
    FLAG_CE_CLAMPED, FLAG_CSE_CLAMPED, FLAG_VOLTAGE_LIMIT,
};
