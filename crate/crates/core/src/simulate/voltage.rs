//! Nonlinear terminal-voltage reconstruction from debiased outputs.

use nalgebra::DVector;

use crate::cellparams::{CellParams, Electrode};
use crate::error::{Error, Result};
use crate::tfgen::{OutputKind, OutputLabel};

/// Terminal voltage outside the configured limits.
pub const FLAG_VOLTAGE_LIMIT: u8 = 1;
/// A surface concentration left `[0, c_s_max]` and was clamped.
pub const FLAG_CSE_CLAMPED: u8 = 2;
/// An electrolyte concentration went non-positive and was clamped.
pub const FLAG_CE_CLAMPED: u8 = 4;

/// Smallest electrolyte concentration used in logarithms, as a fraction of
/// the rest value.
const CE_FLOOR: f64 = 1e-6;

/// Rows of the output vector that the voltage equation reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageTaps {
    /// Collector-adjacent surface concentration, `[neg, pos]`.
    pub cse: [usize; 2],
    /// Collector-adjacent reaction flux, `[neg, pos]`.
    pub flux: [usize; 2],
    /// Electrolyte concentration at `x = 0` and `x = L_tot`.
    pub ce: [usize; 2],
    /// Electrolyte potential at `x = L_tot`.
    pub phie: usize,
}

fn find(labels: &[OutputLabel], kind: OutputKind, electrode: Option<Electrode>, at: f64) -> Result<usize> {
    let tol = 1e-9 * at.abs().max(1e-6);
    labels
        .iter()
        .position(|l| l.kind == kind && l.electrode == electrode && (l.location - at).abs() <= tol)
        .ok_or_else(|| {
            let where_ = match electrode {
                Some(e) => format!("{} z={at}", e.tag()),
                None => format!("x={at} m"),
            };
            Error::Config(format!(
                "voltage reconstruction needs output `{}` at {where_}",
                kind.tag()
            ))
        })
}

impl VoltageTaps {
    pub fn locate(labels: &[OutputLabel], params: &CellParams) -> Result<Self> {
        let l = params.total_thickness();
        let (n, p) = (Some(Electrode::Negative), Some(Electrode::Positive));
        Ok(Self {
            cse: [
                find(labels, OutputKind::SurfaceConc, n, 0.0)?,
                find(labels, OutputKind::SurfaceConc, p, 0.0)?,
            ],
            flux: [find(labels, OutputKind::Flux, n, 0.0)?, find(labels, OutputKind::Flux, p, 0.0)?],
            ce: [
                find(labels, OutputKind::ElectrolyteConc, None, 0.0)?,
                find(labels, OutputKind::ElectrolyteConc, None, l)?,
            ],
            phie: find(labels, OutputKind::ElectrolytePotential, None, l)?,
        })
    }
}

/// Linearisation-independent data for reconstruction: the initial
/// stoichiometries that the surface-concentration outputs are debiased
/// against, and the cell temperature.
#[derive(Debug, Clone)]
pub struct VoltageContext<'a> {
    pub params: &'a CellParams,
    pub taps: VoltageTaps,
    /// `[neg, pos]` stoichiometry at the initial soc.
    pub stoich0: [f64; 2],
    /// K
    pub temp: f64,
}

impl<'a> VoltageContext<'a> {
    pub fn new(params: &'a CellParams, labels: &[OutputLabel], soc_init: f64, temp: f64) -> Result<Self> {
        Ok(Self {
            params,
            taps: VoltageTaps::locate(labels, params)?,
            stoich0: [
                params.stoichiometry(Electrode::Negative, soc_init),
                params.stoichiometry(Electrode::Positive, soc_init),
            ],
            temp,
        })
    }

    fn thermal(&self) -> f64 {
        self.params.gas_constant * self.temp / self.params.faraday
    }

    /// Electrolyte concentration `c_e0 + y`, floored; second value is true
    /// when the floor was hit.
    pub fn electrolyte_conc(&self, y: f64) -> (f64, bool) {
        let ce0 = self.params.initial_electrolyte_conc;
        let ce = ce0 + y;
        if ce >= CE_FLOOR * ce0 {
            (ce, false)
        } else {
            (CE_FLOOR * ce0, true)
        }
    }

    /// Surface stoichiometry `x0 + y / c_max` clamped to `[0, 1]`.
    pub fn surface_stoich(&self, e: Electrode, y: f64) -> (f64, bool) {
        let x = self.stoich0[idx(e)] + y / self.params.electrode(e).max_concentration;
        if (0.0..=1.0).contains(&x) {
            (x, false)
        } else {
            (x.clamp(0.0, 1.0), true)
        }
    }

    /// Concentration overpotential `2 R T (1 - t+) / F ln(c_e / c_e(0))`.
    pub fn log_term(&self, ce: f64, ce_origin: f64) -> f64 {
        2.0 * self.thermal() * (1.0 - self.params.transference) * (ce / ce_origin).ln()
    }

    /// Overpotential from the Butler-Volmer relation
    /// `j = 2 j0 sinh(F eta / (2 R T))`.
    pub fn overpotential(&self, j: f64, j0: f64) -> f64 {
        2.0 * self.thermal() * (j / (2.0 * j0.max(f64::MIN_POSITIVE))).asinh()
    }
}

fn idx(e: Electrode) -> usize {
    match e {
        Electrode::Negative => 0,
        Electrode::Positive => 1,
    }
}

/// Terminal voltage and the intermediate quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageBreakdown {
    pub voltage: f64,
    /// `FLAG_*` bits; the voltage-limit bit is left to the caller.
    pub flags: u8,
    /// `[neg, pos]` collector-side surface stoichiometry.
    pub stoich: [f64; 2],
    /// Electrolyte concentration at `x = 0` and `x = L_tot`.
    pub ce: [f64; 2],
    /// `[neg, pos]` overpotential, V.
    pub eta: [f64; 2],
}

/// `V = [U_p + eta_p + F R_f,p j_p] - [U_n + eta_n + F R_f,n j_n]
///      + phi_e(L_tot) - phi_e(0)`, with the electrolyte potential made of
/// the linear output and the logarithmic concentration term.
pub fn reconstruct_voltage(y: &DVector<f64>, ctx: &VoltageContext) -> VoltageBreakdown {
    let p = ctx.params;
    let t = &ctx.taps;
    let mut flags = 0;
    let (ce_a, clamp_a) = ctx.electrolyte_conc(y[t.ce[0]]);
    let (ce_b, clamp_b) = ctx.electrolyte_conc(y[t.ce[1]]);
    if clamp_a || clamp_b {
        flags |= FLAG_CE_CLAMPED;
    }
    let mut side = [0.0; 2];
    let mut stoich = [0.0; 2];
    let mut eta = [0.0; 2];
    for e in Electrode::BOTH {
        let k = idx(e);
        let (x, clamped) = ctx.surface_stoich(e, y[t.cse[k]]);
        if clamped {
            flags |= FLAG_CSE_CLAMPED;
        }
        let ep = p.electrode(e);
        let ce = if k == 0 { ce_a } else { ce_b };
        let j = y[t.flux[k]];
        let j0 = p.exchange_flux(e, x * ep.max_concentration, ce);
        eta[k] = ctx.overpotential(j, j0);
        stoich[k] = x;
        side[k] = p.ocp(e).eval(x) + eta[k] + p.faraday * ep.film_resistance * j;
    }
    let voltage = side[1] - side[0] + y[t.phie] + ctx.log_term(ce_b, ce_a);
    VoltageBreakdown {
        voltage,
        flags,
        stoich,
        ce: [ce_a, ce_b],
        eta,
    }
}

/// Physical value of every labelled output: absolute concentrations,
/// fluxes and solid potential as they are, and electrolyte potential with
/// the log term added wherever a concentration output shares its location.
pub fn reconstruct_outputs(y: &DVector<f64>, labels: &[OutputLabel], ctx: &VoltageContext) -> Vec<f64> {
    let ce_origin = ctx.electrolyte_conc(y[ctx.taps.ce[0]]).0;
    labels
        .iter()
        .zip(y.iter())
        .map(|(l, &v)| match (l.kind, l.electrode) {
            (OutputKind::SurfaceConc, Some(e)) => {
                let cmax = ctx.params.electrode(e).max_concentration;
                (ctx.stoich0[idx(e)] * cmax + v).clamp(0.0, cmax)
            }
            (OutputKind::ElectrolyteConc, _) => ctx.electrolyte_conc(v).0,
            (OutputKind::ElectrolytePotential, _) => {
                let ce = labels
                    .iter()
                    .position(|m| m.kind == OutputKind::ElectrolyteConc && m.location == l.location);
                match ce {
                    Some(i) => v + ctx.log_term(ctx.electrolyte_conc(y[i]).0, ce_origin),
                    None => v,
                }
            }
            _ => v,
        })
        .collect()
}
