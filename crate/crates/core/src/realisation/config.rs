use crate::error::{Error, Result};

/// Singular value strategy for the truncated SVD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdStrategy {
    /// Lanczos bidiagonalisation on a matrix-free Hankel operator.
    #[default]
    Iterative,
    /// Full dense SVD of the explicit Hankel matrix.
    Dense,
}

impl SvdStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SvdStrategy::Iterative => "iterative",
            SvdStrategy::Dense => "dense",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "iterative" => Some(SvdStrategy::Iterative),
            "dense" => Some(SvdStrategy::Dense),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealisationConfig {
    /// Block rows `H_n`.
    pub hankel_rows: usize,
    /// Columns `H_m`.
    pub hankel_cols: usize,
    /// Transfer-function sampling length, hours.
    pub tf_sample_len: f64,
    /// Transfer-function sampling rate `F_s`, Hz.
    pub sample_rate: f64,
    /// Model sample period `T_s`, s.
    pub system_period: f64,
    pub order: usize,
    /// `S_e,m`.
    pub electrolyte_points: usize,
    /// `S_s,m`.
    pub electrode_points: usize,
    /// Electrolyte eigenmodes `N_lambda`.
    pub modes: usize,
    pub svd_strategy: SvdStrategy,
    pub soc_grid: Vec<f64>,
    /// Temperatures, K.
    pub temp_grid: Vec<f64>,
}

impl Default for RealisationConfig {
    fn default() -> Self {
        Self {
            hankel_rows: 2500,
            hankel_cols: 2500,
            tf_sample_len: 4.5,
            sample_rate: 4.0,
            system_period: 0.25,
            order: 8,
            electrolyte_points: 6,
            electrode_points: 4,
            modes: 10,
            svd_strategy: SvdStrategy::Iterative,
            soc_grid: vec![1.0, 0.75, 0.5, 0.25, 0.0],
            temp_grid: vec![298.15],
        }
    }
}

impl RealisationConfig {
    /// Number of frequency samples, rounded up to even.
    pub fn samples(&self) -> usize {
        let n = (self.tf_sample_len * 3600.0 * self.sample_rate).ceil() as usize;
        n + n % 2
    }

    /// `q = F_s T_s` when it is a positive integer.
    pub fn subsample_factor(&self) -> Result<usize> {
        let q = self.sample_rate * self.system_period;
        let r = q.round();
        if r < 1.0 || (q - r).abs() > 1e-9 * q.max(1.0) {
            return Err(Error::Unsupported(format!(
                "F_s * T_s = {q} is not a positive integer; the interpolating realisation path is not implemented"
            )));
        }
        Ok(r as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Config(format!("{field}: {message}")))
        };
        if self.order == 0 {
            return bad("order", "must be at least 1".into());
        }
        if self.hankel_rows < self.order || self.hankel_cols < self.order {
            return bad(
                "hankel",
                format!(
                    "{}x{} is smaller than order {}",
                    self.hankel_rows, self.hankel_cols, self.order
                ),
            );
        }
        for (name, v) in [
            ("tf_sample_len", self.tf_sample_len),
            ("sample_rate", self.sample_rate),
            ("system_period", self.system_period),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(name, format!("must be positive, got {v}"));
            }
        }
        if self.electrode_points == 0 && self.electrolyte_points == 0 {
            return bad("outputs", "no output locations requested".into());
        }
        if self.modes == 0 {
            return bad("modes", "must be at least 1".into());
        }
        let q = self.subsample_factor()?;
        let n = self.samples();
        let needed = q * (self.hankel_rows + self.hankel_cols + 1);
        if n < needed {
            return bad(
                "tf_sample_len",
                format!("{n} samples cannot fill the shifted Hankel matrix ({needed} needed)"),
            );
        }
        if self.soc_grid.is_empty() || self.temp_grid.is_empty() {
            return bad("grid", "soc and temperature grids must be non-empty".into());
        }
        if self.soc_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return bad("soc_grid", "values must lie in [0, 1]".into());
        }
        if self.temp_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("temp_grid", "temperatures must be positive kelvin".into());
        }
        Ok(())
    }
}
