//! Drive-cycle input: CSV ingestion, resampling and pack power conversion.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// 1800 s synthetic urban-to-motorway current profile for one cell at 1 Hz,
/// beginning with 20 s of rest.
pub const SYNTHETIC_CYCLE: &str = include_str!("../../data/synthetic_cycle.csv");

#[derive(Debug, Clone, PartialEq)]
pub enum CycleSignal {
    /// Cell current, A, positive on discharge.
    Current(Vec<f64>),
    /// Pack power, W, positive on traction.
    Power(Vec<f64>),
}

impl CycleSignal {
    pub fn values(&self) -> &[f64] {
        match self {
            CycleSignal::Current(v) | CycleSignal::Power(v) => v,
        }
    }

    fn column(&self) -> &'static str {
        match self {
            CycleSignal::Current(_) => "current_a",
            CycleSignal::Power(_) => "power_w",
        }
    }

    fn with_values(&self, v: Vec<f64>) -> Self {
        match self {
            CycleSignal::Current(_) => CycleSignal::Current(v),
            CycleSignal::Power(_) => CycleSignal::Power(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    /// s, strictly increasing.
    pub time: Vec<f64>,
    pub signal: CycleSignal,
}

impl DriveCycle {
    pub fn new(time: Vec<f64>, signal: CycleSignal) -> Result<Self> {
        let values = signal.values();
        if time.len() != values.len() {
            return Err(Error::invalid("cycle", "time and signal lengths differ"));
        }
        if time.len() < 2 {
            return Err(Error::invalid("cycle", "needs at least two samples"));
        }
        if time.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("cycle", "non-finite entry"));
        }
        if let Some(i) = time.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "time_s",
                format!("not strictly increasing at sample {}", i + 1),
            ));
        }
        Ok(Self { time, signal })
    }

    /// Parse `time_s` plus exactly one of `current_a` or `power_w`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let col = |name: &str| header.iter().position(|h| h == name);
        let t_col = col("time_s").ok_or_else(|| Error::MissingField("time_s".into()))?;
        let (v_col, power) = match (col("current_a"), col("power_w")) {
            (Some(c), None) => (c, false),
            (None, Some(c)) => (c, true),
            (Some(_), Some(_)) => {
                return Err(Error::invalid("cycle", "both current_a and power_w present"))
            }
            (None, None) => return Err(Error::MissingField("current_a or power_w".into())),
        };
        let (mut time, mut values) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let num = |c: usize| -> Result<f64> {
                let field = rec.get(c).unwrap_or("");
                field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{field}` is not a number"),
                })
            };
            time.push(num(t_col)?);
            values.push(num(v_col)?);
        }
        let signal = if power {
            CycleSignal::Power(values)
        } else {
            CycleSignal::Current(values)
        };
        Self::new(time, signal)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn synthetic() -> Self {
        Self::from_reader(SYNTHETIC_CYCLE.as_bytes()).expect("bundled cycle parses")
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("time_s,{}\n", self.signal.column());
        for (t, v) in self.time.iter().zip(self.signal.values()) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.time[self.time.len() - 1] - self.time[0]
    }

    /// True when samples sit on a uniform `t_s` grid.
    pub fn is_uniform(&self, t_s: f64) -> bool {
        self.time
            .windows(2)
            .all(|w| ((w[1] - w[0]) - t_s).abs() <= 1e-9 * t_s.max(1.0))
    }

    /// Linear interpolation onto `t0 + k t_s` for `k` in
    /// `0..floor(duration / t_s)`; each sample stands for the interval that
    /// follows it, so the final time point is not repeated.
    pub fn resample(&self, t_s: f64) -> Result<Self> {
        if !(t_s > 0.0 && t_s.is_finite()) {
            return Err(Error::invalid("t_s", "must be positive"));
        }
        let n = (self.duration() / t_s + 1e-9).floor() as usize;
        if n == 0 {
            return Err(Error::invalid("cycle", "shorter than one sample period"));
        }
        let t0 = self.time[0];
        let v = self.signal.values();
        let mut seg = 0;
        let (mut time, mut out) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let t = t0 + k as f64 * t_s;
            while seg + 2 < self.time.len() && self.time[seg + 1] <= t {
                seg += 1;
            }
            let (ta, tb) = (self.time[seg], self.time[seg + 1]);
            let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            time.push(t);
            out.push(v[seg] + w * (v[seg + 1] - v[seg]));
        }
        Ok(Self {
            time,
            signal: self.signal.with_values(out),
        })
    }
}

/// Series/parallel topology and drivetrain efficiency for power input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackConfig {
    pub series: u32,
    pub parallel: u32,
    pub motor_efficiency: f64,
}

impl Default for PackConfig {
    fn default() -> Self {
        Self {
            series: 96,
            parallel: 47,
            motor_efficiency: 0.827,
        }
    }
}

impl PackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.series == 0 || self.parallel == 0 {
            return Err(Error::invalid("pack", "series and parallel counts must be at least 1"));
        }
        if !(self.motor_efficiency > 0.0 && self.motor_efficiency <= 1.0) {
            return Err(Error::invalid("motor_efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Cell power for a pack power demand: traction draws
    /// `P / (N_s N_p eta)`, regeneration returns `P eta / (N_s N_p)`.
    pub fn cell_power(&self, pack_power: f64) -> f64 {
        let cells = self.series as f64 * self.parallel as f64;
        if pack_power > 0.0 {
            pack_power / (cells * self.motor_efficiency)
        } else {
            pack_power * self.motor_efficiency / cells
        }
    }
}

/// Cell current for `pack_power` at terminal voltage `voltage`.
pub fn power_to_current(pack_power: f64, pack: &PackConfig, voltage: f64) -> Result<f64> {
    if !(voltage > 0.0) {
        return Err(Error::NonPositiveVoltage(voltage));
    }
    Ok(pack.cell_power(pack_power) / voltage)
}
