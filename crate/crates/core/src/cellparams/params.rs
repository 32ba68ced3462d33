use super::ocp::OcpCurve;
use crate::error::{Error, Result};

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96_485.332_12;
/// Universal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314_462_618;

/// The two porous electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Electrode {
    Negative,
    Positive,
}

impl Electrode {
    pub const BOTH: [Electrode; 2] = [Electrode::Negative, Electrode::Positive];

    /// Sign mapping the electrode-local transfer functions onto the physical
    /// convention (positive applied current discharges the cell).
    pub fn sign(self) -> f64 {
        match self {
            Electrode::Negative => 1.0,
            Electrode::Positive => -1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Electrode::Negative => "neg",
            Electrode::Positive => "pos",
        }
    }
}

/// Geometry, transport and kinetic parameters of one porous electrode.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeParams {
    /// m
    pub thickness: f64,
    /// Electrolyte volume fraction.
    pub porosity: f64,
    pub bruggeman: f64,
    /// Inactive (binder/filler) volume fraction.
    pub filler_fraction: f64,
    /// S/m
    pub solid_conductivity: f64,
    /// m
    pub particle_radius: f64,
    /// m^2/s
    pub solid_diffusivity: f64,
    /// 1/m
    pub surface_area_density: f64,
    /// mol/m^3
    pub max_concentration: f64,
    /// Molar exchange-flux prefactor: j0 = m sqrt(cs (cs_max - cs) ce),
    /// in mol m^-2 s^-1 (m^3/mol)^1.5.
    pub reaction_rate: f64,
    /// Stoichiometry at 0 % and 100 % SOC, stored as (low, high).
    pub stoich_window: (f64, f64),
    /// Ohm m^2 (per unit particle surface).
    pub film_resistance: f64,
}

/// Electrolyte-only region between the electrodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorParams {
    pub thickness: f64,
    pub porosity: f64,
    pub bruggeman: f64,
}

/// Full electrochemical parameterisation of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParams {
    pub name: String,
    pub neg: ElectrodeParams,
    pub sep: SeparatorParams,
    pub pos: ElectrodeParams,
    /// m^2/s
    pub electrolyte_diffusivity: f64,
    /// S/m
    pub electrolyte_conductivity: f64,
    pub transference: f64,
    /// mol/m^3
    pub initial_electrolyte_conc: f64,
    /// m^2
    pub plate_area: f64,
    /// K
    pub temperature_ref: f64,
    /// Ah, used for coulomb counting.
    pub capacity_ah: f64,
    pub faraday: f64,
    pub gas_constant: f64,
    pub ocp_neg: OcpCurve,
    pub ocp_pos: OcpCurve,
}

/// Bulk effective conductivities `(sigma_eff, kappa_eff)`.
///
/// `kappa_eff = porosity^bruggeman * kappa_e`; the solid phase is corrected
/// by its active volume fraction, `sigma_eff = sigma (1 - porosity - filler)`.
pub fn effective_transport(
    porosity: f64,
    bruggeman: f64,
    filler_fraction: f64,
    solid_conductivity: f64,
    kappa_e: f64,
) -> (f64, f64) {
    let sigma_eff = solid_conductivity * (1.0 - porosity - filler_fraction);
    let kappa_eff = porosity.powf(bruggeman) * kappa_e;
    (sigma_eff, kappa_eff)
}

fn require_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn require_fraction(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

impl ElectrodeParams {
    pub fn effective_transport(&self, kappa_e: f64) -> (f64, f64) {
        effective_transport(
            self.porosity,
            self.bruggeman,
            self.filler_fraction,
            self.solid_conductivity,
            kappa_e,
        )
    }

    /// Solid-phase volume fraction `1 - porosity - filler`.
    pub fn active_fraction(&self) -> f64 {
        1.0 - self.porosity - self.filler_fraction
    }

    pub fn validate(&self, tag: &str) -> Result<()> {
        let f = |name: &str| format!("{tag}.{name}");
        require_positive(&f("thickness"), self.thickness)?;
        require_fraction(&f("porosity"), self.porosity)?;
        require_positive(&f("bruggeman"), self.bruggeman)?;
        if !(self.filler_fraction >= 0.0 && self.porosity + self.filler_fraction < 1.0) {
            return Err(Error::invalid(
                f("filler_fraction"),
                "must be >= 0 with porosity + filler < 1",
            ));
        }
        require_positive(&f("solid_conductivity"), self.solid_conductivity)?;
        require_positive(&f("particle_radius"), self.particle_radius)?;
        require_positive(&f("solid_diffusivity"), self.solid_diffusivity)?;
        require_positive(&f("surface_area_density"), self.surface_area_density)?;
        require_positive(&f("max_concentration"), self.max_concentration)?;
        require_positive(&f("reaction_rate"), self.reaction_rate)?;
        let (lo, hi) = self.stoich_window;
        if !(lo >= 0.0 && lo < hi && hi <= 1.0) {
            return Err(Error::invalid(
                f("stoich_window"),
                format!("need 0 <= low < high <= 1, got [{lo}, {hi}]"),
            ));
        }
        if !(self.film_resistance.is_finite() && self.film_resistance >= 0.0) {
            return Err(Error::invalid(f("film_resistance"), "must be >= 0"));
        }
        Ok(())
    }
}

impl SeparatorParams {
    pub fn kappa_eff(&self, kappa_e: f64) -> f64 {
        self.porosity.powf(self.bruggeman) * kappa_e
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sep.thickness", self.thickness)?;
        require_fraction("sep.porosity", self.porosity)?;
        require_positive("sep.bruggeman", self.bruggeman)
    }
}

impl CellParams {
    pub fn electrode(&self, e: Electrode) -> &ElectrodeParams {
        match e {
            Electrode::Negative => &self.neg,
            Electrode::Positive => &self.pos,
        }
    }

    pub fn ocp(&self, e: Electrode) -> &OcpCurve {
        match e {
            Electrode::Negative => &self.ocp_neg,
            Electrode::Positive => &self.ocp_pos,
        }
    }

    pub fn total_thickness(&self) -> f64 {
        self.neg.thickness + self.sep.thickness + self.pos.thickness
    }

    /// Region boundaries `[0, L_n, L_n + L_s, L_tot]` in m.
    pub fn boundaries(&self) -> [f64; 4] {
        let a = self.neg.thickness;
        let b = a + self.sep.thickness;
        [0.0, a, b, b + self.pos.thickness]
    }

    /// Electrolyte volume fraction and effective diffusivity at `x`.
    pub fn electrolyte_props_at(&self, x: f64) -> (f64, f64) {
        let [_, a, b, _] = self.boundaries();
        let (eps, brugg) = if x < a {
            (self.neg.porosity, self.neg.bruggeman)
        } else if x <= b {
            (self.sep.porosity, self.sep.bruggeman)
        } else {
            (self.pos.porosity, self.pos.bruggeman)
        };
        (eps, self.electrolyte_diffusivity * eps.powf(brugg))
    }

    pub fn validate(&self) -> Result<()> {
        self.neg.validate("neg")?;
        self.sep.validate()?;
        self.pos.validate("pos")?;
        require_positive("cell.electrolyte_diffusivity", self.electrolyte_diffusivity)?;
        require_positive("cell.electrolyte_conductivity", self.electrolyte_conductivity)?;
        require_fraction("cell.transference", self.transference)?;
        require_positive("cell.initial_electrolyte_conc", self.initial_electrolyte_conc)?;
        require_positive("cell.plate_area", self.plate_area)?;
        require_positive("cell.temperature_ref", self.temperature_ref)?;
        require_positive("cell.capacity_ah", self.capacity_ah)?;
        require_positive("cell.faraday", self.faraday)?;
        require_positive("cell.gas_constant", self.gas_constant)?;
        Ok(())
    }

    /// Linearisation point at the given SOC and temperature.
    pub fn setpoint(&self, soc: f64, temp: f64) -> Result<Setpoint> {
        if !(0.0..=1.0).contains(&soc) {
            return Err(Error::invalid("soc", format!("must lie in [0, 1], got {soc}")));
        }
        require_positive("temperature", temp)?;
        let neg = self.electrode_setpoint(Electrode::Negative, soc, temp);
        let pos = self.electrode_setpoint(Electrode::Positive, soc, temp);
        Ok(Setpoint {
            soc,
            temp,
            neg,
            pos,
            kappa_sep: self.sep.kappa_eff(self.electrolyte_conductivity),
            ce0: self.initial_electrolyte_conc,
        })
    }

    /// Stoichiometry of electrode `e` at bulk `soc`; the negative electrode
    /// fills with SOC, the positive empties.
    pub fn stoichiometry(&self, e: Electrode, soc: f64) -> f64 {
        let (lo, hi) = self.electrode(e).stoich_window;
        match e {
            Electrode::Negative => lo + soc * (hi - lo),
            Electrode::Positive => hi - soc * (hi - lo),
        }
    }

    /// Open-circuit voltage `U_p - U_n` at bulk `soc`.
    pub fn ocv(&self, soc: f64) -> f64 {
        self.ocp_pos.eval(self.stoichiometry(Electrode::Positive, soc))
            - self.ocp_neg.eval(self.stoichiometry(Electrode::Negative, soc))
    }

    /// Molar exchange flux from the Butler-Volmer prefactor.
    pub fn exchange_flux(&self, e: Electrode, cs: f64, ce: f64) -> f64 {
        let p = self.electrode(e);
        let cs = cs.clamp(0.0, p.max_concentration);
        p.reaction_rate * cs.sqrt() * (p.max_concentration - cs).sqrt() * ce.max(0.0).sqrt()
    }

    fn electrode_setpoint(&self, e: Electrode, soc: f64, temp: f64) -> ElectrodeSetpoint {
        let p = self.electrode(e);
        let stoich = self.stoichiometry(e, soc);
        let cs0 = p.max_concentration * stoich;
        let j0 = self.exchange_flux(e, cs0, self.initial_electrolyte_conc);
        let (ocp, docp_dx) = self.ocp(e).eval_with_slope(stoich);
        let docp_dx = floor_slope(docp_dx);
        let r_ct = charge_transfer_resistance(self.gas_constant, temp, j0, self.faraday);
        let (sigma_eff, kappa_eff) = p.effective_transport(self.electrolyte_conductivity);
        ElectrodeSetpoint {
            stoich,
            cs0,
            j0,
            ocp,
            docp_dc: docp_dx / p.max_concentration,
            r_ct,
            r_tot: p.film_resistance + r_ct,
            sigma_eff,
            kappa_eff,
        }
    }
}

/// Smallest OCP slope magnitude, V per unit stoichiometry, used when
/// linearising. Flat plateaus otherwise put an interface pole far below the
/// lowest sampled frequency.
pub const MIN_OCP_SLOPE: f64 = 5e-3;

fn floor_slope(du: f64) -> f64 {
    if du.abs() >= MIN_OCP_SLOPE {
        du
    } else if du > 0.0 {
        MIN_OCP_SLOPE
    } else {
        -MIN_OCP_SLOPE
    }
}

/// Linearised Butler-Volmer slope `R T / (j0 F^2)` in Ohm m^2 of particle
/// surface, for `j = 2 j0 sinh(F eta / (2 R T))` with molar flux `j`.
pub fn charge_transfer_resistance(gas_constant: f64, temp: f64, j0: f64, faraday: f64) -> f64 {
    gas_constant * temp / (j0 * faraday * faraday)
}

/// Per-electrode linearisation data.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeSetpoint {
    pub stoich: f64,
    /// mol/m^3
    pub cs0: f64,
    /// mol m^-2 s^-1
    pub j0: f64,
    /// V
    pub ocp: f64,
    /// V m^3/mol
    pub docp_dc: f64,
    /// Ohm m^2
    pub r_ct: f64,
    /// Ohm m^2
    pub r_tot: f64,
    pub sigma_eff: f64,
    pub kappa_eff: f64,
}

/// Linearisation point: SOC, temperature and the derived per-electrode data.
#[derive(Debug, Clone, PartialEq)]
pub struct Setpoint {
    pub soc: f64,
    pub temp: f64,
    pub neg: ElectrodeSetpoint,
    pub pos: ElectrodeSetpoint,
    pub kappa_sep: f64,
    pub ce0: f64,
}

impl Setpoint {
    pub fn electrode(&self, e: Electrode) -> &ElectrodeSetpoint {
        match e {
            Electrode::Negative => &self.neg,
            Electrode::Positive => &self.pos,
        }
    }
}
