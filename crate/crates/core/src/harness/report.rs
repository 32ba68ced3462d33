//! Benchmark results and their CSV/text rendering.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Minimum timed repetitions per case.
pub const MIN_REPS: usize = 6;

/// Timings of one benchmark case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub case: String,
    pub variable: String,
    /// `default`, `lower` or `upper` for sweeps; the strategy for SVD runs.
    pub bound: String,
    /// Timed repetitions, s, in run order. Excludes the warm-up.
    pub samples: Vec<f64>,
    /// Warm-up repetition, s; recorded but not in the statistics.
    pub warmup: Option<f64>,
    /// Approximate peak resident memory while the case ran.
    pub peak_mem_bytes: Option<u64>,
    pub error: Option<String>,
}

impl CaseResult {
    pub fn new(case: impl Into<String>, variable: impl Into<String>, bound: impl Into<String>) -> Self {
        Self {
            case: case.into(),
            variable: variable.into(),
            bound: bound.into(),
            samples: Vec::new(),
            warmup: None,
            peak_mem_bytes: None,
            error: None,
        }
    }

    pub fn reps(&self) -> usize {
        self.samples.len()
    }

    pub fn min(&self) -> Option<f64> {
        self.samples.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.samples.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.samples.is_empty()).then(|| self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    pub fn median(&self) -> Option<f64> {
        let mut s = self.samples.clone();
        if s.is_empty() {
            return None;
        }
        s.sort_by(f64::total_cmp);
        let n = s.len();
        Some(if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "text" | "txt" => Some(Self::Text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub title: String,
    pub machine: String,
    pub cases: Vec<CaseResult>,
}

pub const CSV_HEADER: &str = "case,variable,bound,reps,min_s,median_s,mean_s,peak_mem_bytes";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl BenchReport {
    pub fn baseline(&self) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.bound == "default")
    }

    /// Median change against the baseline case, percent.
    pub fn percent_delta(&self, case: &CaseResult) -> Option<f64> {
        let base = self.baseline()?.median()?;
        Some(100.0 * (case.median()? - base) / base)
    }

    /// Swept variables ordered by their largest `|percent delta|`,
    /// most sensitive first. Variables with a failed bound are left out.
    pub fn sensitivity_ranking(&self) -> Vec<(String, f64)> {
        let mut vars: Vec<(String, f64)> = Vec::new();
        let mut failed: Vec<&str> = Vec::new();
        for c in self.cases.iter().filter(|c| c.bound != "default") {
            match self.percent_delta(c) {
                Some(d) => match vars.iter_mut().find(|(v, _)| *v == c.variable) {
                    Some(e) => e.1 = e.1.max(d.abs()),
                    None => vars.push((c.variable.clone(), d.abs())),
                },
                None => failed.push(&c.variable),
            }
        }
        vars.retain(|(v, _)| !failed.contains(&v.as_str()));
        vars.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        vars
    }

    /// Header line with the machine descriptor, then one row per case.
    /// Failed cases keep their row with empty statistics.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n# machine: {}\n{CSV_HEADER}\n", self.title, self.machine);
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.case,
                c.variable,
                c.bound,
                c.reps(),
                opt(c.min()),
                opt(c.median()),
                opt(c.mean()),
                c.peak_mem_bytes.map(|b| b.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\nmachine: {}\n\n", self.title, self.machine);
        let _ = writeln!(
            out,
            "{:<18} {:<10} {:<8} {:>4} {:>10} {:>10} {:>10} {:>9} {:>12}",
            "case", "variable", "bound", "reps", "min_s", "median_s", "mean_s", "delta_%", "peak_mem"
        );
        for c in &self.cases {
            let delta = self
                .percent_delta(c)
                .map(|d| format!("{d:+.1}"))
                .unwrap_or_else(|| "-".into());
            let mem = c
                .peak_mem_bytes
                .map(|b| format!("~{:.1} MiB", b as f64 / (1024.0 * 1024.0)))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<18} {:<10} {:<8} {:>4} {:>10} {:>10} {:>10} {:>9} {:>12}",
                c.case,
                c.variable,
                c.bound,
                c.reps(),
                opt(c.min()),
                opt(c.median()),
                opt(c.mean()),
                delta,
                mem
            );
            if let Some(e) = &c.error {
                let _ = writeln!(out, "  failed: {e}");
            }
        }
        let ranking = self.sensitivity_ranking();
        if !ranking.is_empty() {
            out.push_str("\nsensitivity ranking (max |delta|):\n");
            for (i, (v, d)) in ranking.iter().enumerate() {
                let _ = writeln!(out, "  {}. {v} {d:.1}%", i + 1);
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Text => self.to_text(),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        std::fs::write(path, self.render(format)).map_err(|e| Error::io(path, e))
    }
}
