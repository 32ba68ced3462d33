//! Realisation settings resolved from defaults, a TOML file and flags.

use std::path::Path;

use cidra_core::realisation::{RealisationConfig, SvdStrategy};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Keys accepted in a `--config` file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub hankel_rows: Option<usize>,
    pub hankel_cols: Option<usize>,
    pub tlen_hours: Option<f64>,
    pub sample_rate: Option<f64>,
    pub system_period: Option<f64>,
    pub order: Option<usize>,
    pub electrolyte_points: Option<usize>,
    pub electrode_points: Option<usize>,
    pub modes: Option<usize>,
    pub svd: Option<String>,
    pub soc_grid: Option<Vec<f64>>,
    pub temp_grid: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
    }
}

/// Realisation flags shared by `realise` and `sensitivity`.
#[derive(Debug, Clone, Default, Args)]
pub struct RealiseFlags {
    /// TOML file with realisation settings; flags override it
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Square Hankel dimension (sets both H_n and H_m)
    #[arg(long)]
    pub hankel: Option<usize>,
    /// Hankel block rows H_n
    #[arg(long)]
    pub hankel_rows: Option<usize>,
    /// Hankel block columns H_m
    #[arg(long)]
    pub hankel_cols: Option<usize>,
    /// Transfer-function sample length T_len in hours
    #[arg(long)]
    pub tlen_hours: Option<f64>,
    /// Transfer-function sampling rate F_s in Hz
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Model sample period T_s in seconds
    #[arg(long)]
    pub period: Option<f64>,
    /// Model order M
    #[arg(long)]
    pub order: Option<usize>,
    /// Electrolyte output locations S_e
    #[arg(long)]
    pub electrolyte_points: Option<usize>,
    /// Output locations per electrode S_s
    #[arg(long)]
    pub electrode_points: Option<usize>,
    /// Electrolyte eigenmodes
    #[arg(long)]
    pub modes: Option<usize>,
    /// SVD strategy: iterative or dense
    #[arg(long)]
    pub svd: Option<String>,
    /// Comma-separated soc grid
    #[arg(long, value_delimiter = ',')]
    pub soc: Option<Vec<f64>>,
    /// Comma-separated temperature grid, K
    #[arg(long, value_delimiter = ',')]
    pub temp: Option<Vec<f64>>,
}

fn strategy(s: &str) -> Result<SvdStrategy, CliError> {
    SvdStrategy::parse(s).ok_or_else(|| CliError::validation(format!("unknown SVD strategy `{s}`")))
}

impl RealiseFlags {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RealisationConfig, CliError> {
        let mut c = RealisationConfig::default();
        if let Some(path) = &self.config {
            let f = ConfigFile::load(path)?;
            set(&mut c.hankel_rows, f.hankel_rows);
            set(&mut c.hankel_cols, f.hankel_cols);
            set(&mut c.tf_sample_len, f.tlen_hours);
            set(&mut c.sample_rate, f.sample_rate);
            set(&mut c.system_period, f.system_period);
            set(&mut c.order, f.order);
            set(&mut c.electrolyte_points, f.electrolyte_points);
            set(&mut c.electrode_points, f.electrode_points);
            set(&mut c.modes, f.modes);
            if let Some(s) = &f.svd {
                c.svd_strategy = strategy(s)?;
            }
            set(&mut c.soc_grid, f.soc_grid);
            set(&mut c.temp_grid, f.temp_grid);
        }
        set(&mut c.hankel_rows, self.hankel);
        set(&mut c.hankel_cols, self.hankel);
        set(&mut c.hankel_rows, self.hankel_rows);
        set(&mut c.hankel_cols, self.hankel_cols);
        set(&mut c.tf_sample_len, self.tlen_hours);
        set(&mut c.sample_rate, self.sample_rate);
        set(&mut c.system_period, self.period);
        set(&mut c.order, self.order);
        set(&mut c.electrolyte_points, self.electrolyte_points);
        set(&mut c.electrode_points, self.electrode_points);
        set(&mut c.modes, self.modes);
        if let Some(s) = &self.svd {
            c.svd_strategy = strategy(s)?;
        }
        set(&mut c.soc_grid, self.soc.clone());
        set(&mut c.temp_grid, self.temp.clone());
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Manifest view of a resolved configuration.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    pub hankel_rows: usize,
    pub hankel_cols: usize,
    pub tlen_hours: f64,
    pub sample_rate: f64,
    pub system_period: f64,
    pub order: usize,
    pub electrolyte_points: usize,
    pub electrode_points: usize,
    pub modes: usize,
    pub svd: &'static str,
    pub soc_grid: Vec<f64>,
    pub temp_grid: Vec<f64>,
}

impl From<&RealisationConfig> for ResolvedConfig {
    fn from(c: &RealisationConfig) -> Self {
        Self {
            hankel_rows: c.hankel_rows,
            hankel_cols: c.hankel_cols,
            tlen_hours: c.tf_sample_len,
            sample_rate: c.sample_rate,
            system_period: c.system_period,
            order: c.order,
            electrolyte_points: c.electrolyte_points,
            electrode_points: c.electrode_points,
            modes: c.modes,
            svd: c.svd_strategy.as_str(),
            soc_grid: c.soc_grid.clone(),
            temp_grid: c.temp_grid.clone(),
        }
    }
}
