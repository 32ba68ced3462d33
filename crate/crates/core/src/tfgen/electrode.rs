//! Electrode transfer functions in electrode-local form.
//!
//! `z` runs from the current collector (`z = 0`) to the separator (`z = 1`).
//! The returned values follow the negative-electrode convention; multiply by
//! [`Electrode::sign`] for the physical positive-electrode response.

use num_complex::Complex64;

use super::kernels::{beta, cosh_gap, jw_kernel, nu_cosh_over_sinh};
use crate::cellparams::{CellParams, Electrode, Setpoint};

/// Linearised electrode at a setpoint, ready for evaluation at any `s`.
#[derive(Debug, Clone)]
pub struct ElectrodeTf {
    pub electrode: Electrode,
    pub thickness: f64,
    pub area_density: f64,
    pub sigma_eff: f64,
    pub kappa_eff: f64,
    pub radius: f64,
    pub diffusivity: f64,
    pub r_tot: f64,
    pub docp_dc: f64,
    pub plate_area: f64,
    pub faraday: f64,
}

impl ElectrodeTf {
    pub fn new(params: &CellParams, setpoint: &Setpoint, electrode: Electrode) -> Self {
        let p = params.electrode(electrode);
        let sp = setpoint.electrode(electrode);
        Self {
            electrode,
            thickness: p.thickness,
            area_density: p.surface_area_density,
            sigma_eff: sp.sigma_eff,
            kappa_eff: sp.kappa_eff,
            radius: p.particle_radius,
            diffusivity: p.solid_diffusivity,
            r_tot: sp.r_tot,
            docp_dc: sp.docp_dc,
            plate_area: params.plate_area,
            faraday: params.faraday,
        }
    }

    pub fn beta(&self, s: Complex64) -> Complex64 {
        beta(s, self.radius, self.diffusivity)
    }

    /// Interfacial impedance `R_tot + dU/dc R_s/(F D_s) K(beta)` in Ohm m^2.
    pub fn interface_impedance(&self, s: Complex64) -> Complex64 {
        let k = jw_kernel(self.beta(s));
        self.r_tot + self.docp_dc * self.radius / (self.faraday * self.diffusivity) * k
    }

    /// Dimensionless `nu(s)`, principal branch.
    pub fn nu(&self, s: Complex64) -> Complex64 {
        if s == Complex64::new(0.0, 0.0) {
            return s;
        }
        let num = self.area_density * (1.0 / self.sigma_eff + 1.0 / self.kappa_eff);
        self.thickness * (num / self.interface_impedance(s)).sqrt()
    }

    /// Uniform flux `1 / (a_s F L A)` carrying the full applied current.
    pub fn uniform_flux(&self) -> f64 {
        1.0 / (self.area_density * self.faraday * self.thickness * self.plate_area)
    }

    fn flux_with_nu(&self, z: f64, nu: Complex64) -> Complex64 {
        let (sig, kap) = (self.sigma_eff, self.kappa_eff);
        let shape = sig * nu_cosh_over_sinh(z, nu) + kap * nu_cosh_over_sinh(1.0 - z, nu);
        self.uniform_flux() * shape / (sig + kap)
    }

    /// Reaction flux per applied current, mol m^-2 s^-1 A^-1.
    pub fn flux(&self, z: f64, s: Complex64) -> Complex64 {
        self.flux_with_nu(z, self.nu(s))
    }

    /// Debiased surface concentration per applied current, mol m^-3 A^-1.
    pub fn surface_conc(&self, z: f64, s: Complex64) -> Complex64 {
        let nu = self.nu(s);
        self.radius / self.diffusivity * jw_kernel(self.beta(s)) * self.flux_with_nu(z, nu)
    }

    /// Solid potential relative to the current collector, V A^-1.
    pub fn solid_potential(&self, z: f64, s: Complex64) -> Complex64 {
        let nu = self.nu(s);
        let (sig, kap) = (self.sigma_eff, self.kappa_eff);
        let body = kap * cosh_gap(1.0 - z, nu) + sig * (cosh_gap(z, nu) - cosh_gap(0.0, nu) + z);
        -self.thickness / (self.plate_area * sig * (sig + kap)) * body
    }

    /// Electrolyte potential drop across the electrode measured from the
    /// collector side, `phi_e(z) - phi_e(0)`, for the negative-electrode
    /// geometry (current enters the electrolyte along `z`).
    pub(crate) fn electrolyte_drop(&self, z: f64, nu: Complex64) -> Complex64 {
        let (sig, kap) = (self.sigma_eff, self.kappa_eff);
        let body = sig * (cosh_gap(0.0, nu) - cosh_gap(z, nu)) + kap * (z - cosh_gap(1.0 - z, nu));
        -self.thickness / (self.plate_area * kap * (sig + kap)) * body
    }
}
