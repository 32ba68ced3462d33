//! Stacked single-input multi-output frequency response.

use std::fmt;

use num_complex::Complex64;

use super::electrolyte::{EigenSet, ElectrolyteTf};
use super::residue::{extract_integrator_residue, IntegratorResidue};
use crate::cellparams::{CellParams, Electrode, Setpoint};
use crate::error::{Error, Result};
use crate::exec::{map_range, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputKind {
    SurfaceConc,
    SolidPotential,
    Flux,
    ElectrolytePotential,
    ElectrolyteConc,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] = [
        OutputKind::SurfaceConc,
        OutputKind::SolidPotential,
        OutputKind::Flux,
        OutputKind::ElectrolytePotential,
        OutputKind::ElectrolyteConc,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            OutputKind::SurfaceConc => "cse",
            OutputKind::SolidPotential => "phis",
            OutputKind::Flux => "j",
            OutputKind::ElectrolytePotential => "phie",
            OutputKind::ElectrolyteConc => "ce",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Sampled per electrode at dimensionless `z` (otherwise across the
    /// cell at `x`).
    pub fn is_electrode(self) -> bool {
        matches!(
            self,
            OutputKind::SurfaceConc | OutputKind::SolidPotential | OutputKind::Flux
        )
    }
}

/// One output row: kind, electrode (electrode outputs only) and location
/// (`z` in `[0, 1]`, or `x` in metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputLabel {
    pub kind: OutputKind,
    pub electrode: Option<Electrode>,
    pub location: f64,
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.electrode {
            Some(e) => write!(f, "{}_{}_z{:.4}", self.kind.tag(), e.tag(), self.location),
            None => write!(f, "{}_x{:.3}um", self.kind.tag(), self.location * 1e6),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TfRequest {
    pub setpoint: Setpoint,
    /// Dimensionless positions, shared by both electrodes.
    pub electrode_locations: Vec<f64>,
    /// Positions across the full cell, m.
    pub electrolyte_locations: Vec<f64>,
    pub outputs: Vec<OutputKind>,
    /// Electrolyte eigenmodes kept.
    pub modes: usize,
}

/// `n` points evenly spaced over `[lo, hi]`, end points included.
fn spread(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl TfRequest {
    /// All five outputs on evenly spaced locations that include the
    /// collectors and both cell ends.
    pub fn uniform(
        params: &CellParams,
        setpoint: Setpoint,
        electrode_points: usize,
        electrolyte_points: usize,
        modes: usize,
    ) -> Self {
        Self {
            setpoint,
            electrode_locations: spread(0.0, 1.0, electrode_points),
            electrolyte_locations: spread(0.0, params.total_thickness(), electrolyte_points),
            outputs: OutputKind::ALL.to_vec(),
            modes,
        }
    }

    pub fn validate(&self, params: &CellParams) -> Result<()> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        let wants_electrode = self.outputs.iter().any(|k| k.is_electrode());
        let wants_electrolyte = self.outputs.iter().any(|k| !k.is_electrode());
        if wants_electrode
            && (self.electrode_locations.is_empty()
                || !sorted(&self.electrode_locations)
                || self.electrode_locations.iter().any(|z| !(0.0..=1.0).contains(z)))
        {
            return Err(Error::Config(
                "electrode locations must be sorted, distinct and within [0, 1]".into(),
            ));
        }
        let l = params.total_thickness();
        if wants_electrolyte
            && (self.electrolyte_locations.is_empty()
                || !sorted(&self.electrolyte_locations)
                || self.electrolyte_locations.iter().any(|x| !(0.0..=l).contains(x)))
        {
            return Err(Error::Config(format!(
                "electrolyte locations must be sorted, distinct and within [0, {l:e}] m"
            )));
        }
        if wants_electrolyte && self.modes == 0 {
            return Err(Error::Config("need at least one electrolyte mode".into()));
        }
        Ok(())
    }

    /// Row labels in response order: each requested kind in turn, electrode
    /// kinds as negative then positive over all `z`.
    pub fn labels(&self) -> Vec<OutputLabel> {
        let mut out = Vec::new();
        for &kind in &self.outputs {
            if kind.is_electrode() {
                for e in Electrode::BOTH {
                    for &z in &self.electrode_locations {
                        out.push(OutputLabel {
                            kind,
                            electrode: Some(e),
                            location: z,
                        });
                    }
                }
            } else {
                for &x in &self.electrolyte_locations {
                    out.push(OutputLabel {
                        kind,
                        electrode: None,
                        location: x,
                    });
                }
            }
        }
        out
    }
}

/// Evaluates every requested row at a single `s`.
#[derive(Debug, Clone)]
pub struct SimoEvaluator {
    tf: ElectrolyteTf,
    labels: Vec<OutputLabel>,
    has_ce: bool,
}

impl SimoEvaluator {
    pub fn new(params: &CellParams, req: &TfRequest) -> Result<Self> {
        req.validate(params)?;
        let has_ce = req.outputs.contains(&OutputKind::ElectrolyteConc);
        // modes only matter for the concentration rows
        let eigen = if has_ce {
            super::electrolyte::electrolyte_eigenvalues(params, req.modes)?
        } else {
            super::electrolyte::electrolyte_eigenvalues(params, 1)?
        };
        Ok(Self::with_eigen(params, req, eigen))
    }

    pub fn with_eigen(params: &CellParams, req: &TfRequest, eigen: EigenSet) -> Self {
        Self {
            tf: ElectrolyteTf::with_eigen(params, &req.setpoint, eigen),
            labels: req.labels(),
            has_ce: req.outputs.contains(&OutputKind::ElectrolyteConc),
        }
    }

    pub fn labels(&self) -> &[OutputLabel] {
        &self.labels
    }

    pub fn electrolyte(&self) -> &ElectrolyteTf {
        &self.tf
    }

    /// Physical value of every row at `s` (positive-electrode rows carry the
    /// sign flip).
    pub fn eval(&self, s: Complex64) -> Vec<Complex64> {
        let sources = if self.has_ce {
            self.tf.modal_sources(s)
        } else {
            Vec::new()
        };
        self.labels
            .iter()
            .map(|lab| self.eval_row(lab, s, &sources))
            .collect()
    }

    pub fn eval_label(&self, row: usize, s: Complex64) -> Complex64 {
        let lab = &self.labels[row];
        let sources = if lab.kind == OutputKind::ElectrolyteConc {
            self.tf.modal_sources(s)
        } else {
            Vec::new()
        };
        self.eval_row(lab, s, &sources)
    }

    fn eval_row(&self, lab: &OutputLabel, s: Complex64, sources: &[Complex64]) -> Complex64 {
        match lab.electrode {
            Some(e) => {
                let etf = match e {
                    Electrode::Negative => &self.tf.neg,
                    Electrode::Positive => &self.tf.pos,
                };
                let z = lab.location;
                let generic = match lab.kind {
                    OutputKind::SurfaceConc => etf.surface_conc(z, s),
                    OutputKind::SolidPotential => etf.solid_potential(z, s),
                    _ => etf.flux(z, s),
                };
                e.sign() * generic
            }
            None => match lab.kind {
                OutputKind::ElectrolytePotential => self.tf.potential(lab.location, s),
                _ => self.tf.concentration_with_sources(lab.location, s, sources),
            },
        }
    }

    /// Real sampling point for the origin limit, well inside the region
    /// where every row is analytic in `s`.
    pub fn residue_reference(&self) -> f64 {
        let mut scale = f64::INFINITY;
        for etf in [&self.tf.neg, &self.tf.pos] {
            scale = scale.min(etf.diffusivity / (etf.radius * etf.radius));
            // zero of the interface impedance on the negative real axis
            let pole = 3.0 * etf.docp_dc.abs() / (etf.faraday * etf.radius * etf.r_tot);
            if pole > 0.0 {
                scale = scale.min(pole);
            }
        }
        if let Some(l1) = self.tf.eigen.lambda.first() {
            scale = scale.min(*l1);
        }
        1e-2 * scale
    }

    /// Integrator residue of every row.
    pub fn residues(&self, mode: ExecMode) -> Result<Vec<IntegratorResidue>> {
        let s_ref = self.residue_reference();
        map_range(mode, self.labels.len(), |row| {
            extract_integrator_residue(
                |s| self.eval_label(row, s),
                s_ref,
                &self.labels[row].to_string(),
            )
        })
        .into_iter()
        .collect()
    }
}

/// Response matrix on a frequency grid, origin pole removed.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub s: Vec<Complex64>,
    /// `values[row][j]`.
    pub values: Vec<Vec<Complex64>>,
    pub res0: Vec<f64>,
    pub labels: Vec<OutputLabel>,
}

impl FrequencyResponse {
    pub fn rows(&self) -> usize {
        self.values.len()
    }
}

/// Evaluate all requested rows on `s_grid`.
///
/// `s = 0` entries take the corrected limit `G*(0)`; non-finite entries
/// take the real part of the response at the largest finite `|s|`. Residues
/// are removed from every row so the result is finite everywhere.
pub fn assemble_simo(
    params: &CellParams,
    req: &TfRequest,
    s_grid: &[Complex64],
    mode: ExecMode,
) -> Result<FrequencyResponse> {
    let eval = SimoEvaluator::new(params, req)?;
    assemble_with(&eval, s_grid, mode)
}

pub fn assemble_with(
    eval: &SimoEvaluator,
    s_grid: &[Complex64],
    mode: ExecMode,
) -> Result<FrequencyResponse> {
    let residues = eval.residues(mode)?;
    let zero = Complex64::new(0.0, 0.0);
    let top = s_grid
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .max_by(|a, b| a.norm().total_cmp(&b.norm()));
    let columns: Vec<Vec<Complex64>> = map_range(mode, s_grid.len(), |j| {
        let s = s_grid[j];
        if s == zero {
            residues.iter().map(|r| r.dc).collect()
        } else if !s.is_finite() {
            match top {
                Some(t) => eval
                    .eval(t)
                    .into_iter()
                    .zip(&residues)
                    .map(|(g, r)| Complex64::new(r.correct(t, g).re, 0.0))
                    .collect(),
                None => residues.iter().map(|r| r.dc).collect(),
            }
        } else {
            eval.eval(s)
                .into_iter()
                .zip(&residues)
                .map(|(g, r)| r.correct(s, g))
                .collect()
        }
    });
    let rows = eval.labels().len();
    let mut values = vec![Vec::with_capacity(s_grid.len()); rows];
    for col in columns {
        for (row, v) in values.iter_mut().zip(col) {
            row.push(v);
        }
    }
    Ok(FrequencyResponse {
        s: s_grid.to_vec(),
        values,
        res0: residues.iter().map(|r| r.res0).collect(),
        labels: eval.labels().to_vec(),
    })
}
