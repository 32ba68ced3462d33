//! Cell parameterisation: file loading, validation and linearisation
//! setpoints.

mod file;
mod ocp;
mod params;

pub use file::{format_params, load_params, parse_params, save_params, EXAMPLE_CELL};
pub use ocp::{Interpolation, OcpCurve};
pub use params::{
    MIN_OCP_SLOPE,
    charge_transfer_resistance, effective_transport, CellParams, Electrode, ElectrodeParams,
    ElectrodeSetpoint, SeparatorParams, Setpoint, FARADAY, GAS_CONSTANT,
};
