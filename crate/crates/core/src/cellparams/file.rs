//! Parameter file grammar (`schema = 1`):
//!
//! ```text
//! # comment
//! schema = 1
//! [cell]      key = value lines
//! [neg]       key = value lines (electrode)
//! [sep]       thickness, porosity, bruggeman
//! [pos]       key = value lines (electrode)
//! [ocp_neg]   optional `interpolation = cubic|linear`, then
//!             `stoichiometry potential` pairs, one per line
//! [ocp_pos]   same as ocp_neg
//! ```
//!
//! All values are SI. `stoich_window` is written as two numbers
//! `low high`. `[cell] total_thickness` must equal the sum of the three
//! region thicknesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::ocp::{Interpolation, OcpCurve};
use super::params::{CellParams, ElectrodeParams, SeparatorParams, FARADAY, GAS_CONSTANT};
use crate::error::{Error, Result};

const SCHEMA: u32 = 1;
const SECTIONS: [&str; 6] = ["cell", "neg", "sep", "pos", "ocp_neg", "ocp_pos"];

/// Representative LG M50-like parameter set shipped with the crate.
pub const EXAMPLE_CELL: &str = include_str!("../../data/example_cell.params");

#[derive(Default)]
struct Section {
    values: BTreeMap<String, (usize, String)>,
    rows: Vec<(usize, f64, f64)>,
}

impl Section {
    fn get(&self, section: &str, key: &str) -> Result<f64> {
        let field = format!("{section}.{key}");
        let (line, raw) = self
            .values
            .get(key)
            .ok_or_else(|| Error::MissingField(field.clone()))?;
        raw.parse::<f64>().map_err(|_| Error::Parse {
            line: *line,
            message: format!("`{field}` is not a number: {raw}"),
        })
    }

    fn get_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        if self.values.contains_key(key) {
            self.get(section, key)
        } else {
            Ok(default)
        }
    }

    fn get_pair(&self, section: &str, key: &str) -> Result<(f64, f64)> {
        let field = format!("{section}.{key}");
        let (line, raw) = self
            .values
            .get(key)
            .ok_or_else(|| Error::MissingField(field.clone()))?;
        let parts: Vec<f64> = raw
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{field}` must be two numbers"),
            })?;
        match parts[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Parse {
                line: *line,
                message: format!("`{field}` must be two numbers"),
            }),
        }
    }
}

fn electrode(name: &str, s: &Section) -> Result<ElectrodeParams> {
    Ok(ElectrodeParams {
        thickness: s.get(name, "thickness")?,
        porosity: s.get(name, "porosity")?,
        bruggeman: s.get_or(name, "bruggeman", 1.5)?,
        filler_fraction: s.get_or(name, "filler_fraction", 0.0)?,
        solid_conductivity: s.get(name, "solid_conductivity")?,
        particle_radius: s.get(name, "particle_radius")?,
        solid_diffusivity: s.get(name, "solid_diffusivity")?,
        surface_area_density: s.get(name, "surface_area_density")?,
        max_concentration: s.get(name, "max_concentration")?,
        reaction_rate: s.get(name, "reaction_rate")?,
        stoich_window: s.get_pair(name, "stoich_window")?,
        film_resistance: s.get_or(name, "film_resistance", 0.0)?,
    })
}

fn ocp(name: &str, s: &Section) -> Result<OcpCurve> {
    let interpolation = match s.values.get("interpolation") {
        None => Interpolation::Cubic,
        Some((_, v)) => Interpolation::parse(v).ok_or_else(|| Error::MalformedOcp {
            table: name.into(),
            message: format!("unknown interpolation `{v}`"),
        })?,
    };
    if let Some(k) = s.values.keys().find(|k| *k != "interpolation") {
        return Err(Error::MalformedOcp {
            table: name.into(),
            message: format!("unexpected key `{k}`"),
        });
    }
    let x = s.rows.iter().map(|r| r.1).collect();
    let y = s.rows.iter().map(|r| r.2).collect();
    OcpCurve::new(name, x, y, interpolation)
}

/// Parse and validate a parameter file held in memory.
pub fn parse_params(text: &str) -> Result<CellParams> {
    let mut sections: BTreeMap<&str, Section> = BTreeMap::new();
    let mut current: Option<&str> = None;
    let mut schema = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            let known = SECTIONS.iter().find(|s| **s == name).ok_or(Error::Parse {
                line: line_no,
                message: format!("unknown section [{name}]"),
            })?;
            if sections.contains_key(known) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate section [{name}]"),
                });
            }
            sections.insert(known, Section::default());
            current = Some(known);
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match current {
                None if k == "schema" => schema = Some((line_no, v)),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("key `{k}` outside of a section"),
                    })
                }
                Some(sec) => {
                    let s = sections.get_mut(sec).unwrap();
                    if s.values.insert(k.clone(), (line_no, v)).is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("duplicate key `{sec}.{k}`"),
                        });
                    }
                }
            }
            continue;
        }
        match current {
            Some(sec @ ("ocp_neg" | "ocp_pos")) => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                let parsed = match cols[..] {
                    [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                    _ => None,
                };
                let (x, y) = parsed.ok_or_else(|| Error::MalformedOcp {
                    table: sec.into(),
                    message: format!("line {line_no}: expected two numeric columns"),
                })?;
                sections.get_mut(sec).unwrap().rows.push((line_no, x, y));
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unexpected line `{line}`"),
                })
            }
        }
    }

    match schema {
        Some((_, v)) if v == SCHEMA.to_string() => {}
        Some((line, v)) => {
            return Err(Error::Parse {
                line,
                message: format!("unsupported schema `{v}`"),
            })
        }
        None => return Err(Error::MissingField("schema".into())),
    }
    for name in SECTIONS {
        if !sections.contains_key(name) {
            return Err(Error::MissingField(format!("[{name}]")));
        }
    }

    let cell = &sections["cell"];
    let sep = &sections["sep"];
    let params = CellParams {
        name: cell
            .values
            .get("name")
            .map(|v| v.1.clone())
            .unwrap_or_else(|| "unnamed".into()),
        neg: electrode("neg", &sections["neg"])?,
        sep: SeparatorParams {
            thickness: sep.get("sep", "thickness")?,
            porosity: sep.get("sep", "porosity")?,
            bruggeman: sep.get_or("sep", "bruggeman", 1.5)?,
        },
        pos: electrode("pos", &sections["pos"])?,
        electrolyte_diffusivity: cell.get("cell", "electrolyte_diffusivity")?,
        electrolyte_conductivity: cell.get("cell", "electrolyte_conductivity")?,
        transference: cell.get("cell", "transference")?,
        initial_electrolyte_conc: cell.get("cell", "initial_electrolyte_conc")?,
        plate_area: cell.get("cell", "plate_area")?,
        temperature_ref: cell.get("cell", "temperature_ref")?,
        capacity_ah: cell.get("cell", "capacity_ah")?,
        faraday: cell.get_or("cell", "faraday", FARADAY)?,
        gas_constant: cell.get_or("cell", "gas_constant", GAS_CONSTANT)?,
        ocp_neg: ocp("ocp_neg", &sections["ocp_neg"])?,
        ocp_pos: ocp("ocp_pos", &sections["ocp_pos"])?,
    };
    params.validate()?;

    let declared = cell.get("cell", "total_thickness")?;
    let total = params.total_thickness();
    if (declared - total).abs() > 1e-12 * total {
        return Err(Error::invalid(
            "cell.total_thickness",
            format!("declared {declared} m but regions sum to {total} m"),
        ));
    }
    Ok(params)
}

/// Load and validate a parameter file.
pub fn load_params(path: impl AsRef<Path>) -> Result<CellParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text)
}

/// Serialise to the file grammar; numbers use shortest round-trip notation.
pub fn format_params(p: &CellParams) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "schema = {SCHEMA}");
    let _ = writeln!(w, "\n[cell]");
    let _ = writeln!(w, "name = {}", p.name);
    let _ = writeln!(w, "total_thickness = {:e}", p.total_thickness());
    for (k, v) in [
        ("electrolyte_diffusivity", p.electrolyte_diffusivity),
        ("electrolyte_conductivity", p.electrolyte_conductivity),
        ("transference", p.transference),
        ("initial_electrolyte_conc", p.initial_electrolyte_conc),
        ("plate_area", p.plate_area),
        ("temperature_ref", p.temperature_ref),
        ("capacity_ah", p.capacity_ah),
        ("faraday", p.faraday),
        ("gas_constant", p.gas_constant),
    ] {
        let _ = writeln!(w, "{k} = {v:e}");
    }
    for (tag, e) in [("neg", &p.neg), ("pos", &p.pos)] {
        if tag == "pos" {
            let _ = writeln!(w, "\n[sep]");
            let _ = writeln!(w, "thickness = {:e}", p.sep.thickness);
            let _ = writeln!(w, "porosity = {:e}", p.sep.porosity);
            let _ = writeln!(w, "bruggeman = {:e}", p.sep.bruggeman);
        }
        let _ = writeln!(w, "\n[{tag}]");
        for (k, v) in [
            ("thickness", e.thickness),
            ("porosity", e.porosity),
            ("bruggeman", e.bruggeman),
            ("filler_fraction", e.filler_fraction),
            ("solid_conductivity", e.solid_conductivity),
            ("particle_radius", e.particle_radius),
            ("solid_diffusivity", e.solid_diffusivity),
            ("surface_area_density", e.surface_area_density),
            ("max_concentration", e.max_concentration),
            ("reaction_rate", e.reaction_rate),
            ("film_resistance", e.film_resistance),
        ] {
            let _ = writeln!(w, "{k} = {v:e}");
        }
        let _ = writeln!(
            w,
            "stoich_window = {:e} {:e}",
            e.stoich_window.0, e.stoich_window.1
        );
    }
    for (tag, c) in [("ocp_neg", &p.ocp_neg), ("ocp_pos", &p.ocp_pos)] {
        let _ = writeln!(w, "\n[{tag}]");
        let _ = writeln!(w, "interpolation = {}", c.interpolation().as_str());
        for (x, y) in c.stoich().iter().zip(c.potential()) {
            let _ = writeln!(w, "{x:e} {y:e}");
        }
    }
    out
}

pub fn save_params(p: &CellParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_params(p)).map_err(|e| Error::io(path, e))
}

impl CellParams {
    /// The bundled representative cell. Values approximate a published
    /// LG M50 parameterisation and are not a validated dataset.
    pub fn example() -> CellParams {
        parse_params(EXAMPLE_CELL).expect("bundled parameter file is valid")
    }
}
