//! Transfer functions of the linearised cell model in the Laplace domain.

pub mod electrode;
pub mod electrolyte;
pub mod kernels;
pub mod residue;
pub mod simo;

pub use electrode::ElectrodeTf;
pub use electrolyte::{eigen_determinant, electrolyte_eigenvalues, EigenSet, ElectrolyteTf};
pub use residue::{extract_integrator_residue, IntegratorResidue};
pub use simo::{
    assemble_simo, assemble_with, FrequencyResponse, OutputKind, OutputLabel, SimoEvaluator,
    TfRequest,
};
