//! Reduced-order lithium-ion cell models by discrete realisation of
//! electrochemical transfer functions.
//!
//! The pipeline evaluates single-input multiple-output transfer functions of
//! a linearised pseudo-2D cell ([`tfgen`]), samples them on a bilinear
//! frequency grid, recovers the discrete impulse response by inverse FFT and
//! realises a state-space model with the Ho-Kalman algorithm
//! ([`realisation`]). Models are simulated against drive cycles with
//! nonlinear voltage reconstruction ([`simulate`]). [`harness`] times the
//! pipeline.

pub mod cellparams;
pub mod error;
pub mod exec;
pub mod harness;
pub mod realisation;
pub mod simulate;
pub mod tfgen;

pub use error::{Error, Result};
pub use exec::ExecMode;
