//! Subcommand bodies.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cidra_core::cellparams::{parse_params, CellParams, EXAMPLE_CELL};
use cidra_core::harness::{bench_svd, sensitivity_sweep, ReportFormat, SvdBenchOptions, SweepOptions};
use cidra_core::realisation::{realise_grid, ModelGrid, SvdStrategy, LABELS_EXTENSION, MODEL_EXTENSION};
use cidra_core::simulate::{run_drive_cycle, BlendedGrid, DriveCycle, PackConfig, SimulationConfig, SYNTHETIC_CYCLE};
use cidra_core::ExecMode;
use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::manifest::{digest, relative, InputDigest, Manifest};
use crate::{BenchArgs, CliError, RealiseArgs, SensitivityArgs, SimulateArgs};

pub struct Context {
    pub threads: Option<usize>,
    pub seed: u64,
}

fn read_bytes(path: &Path, what: &str) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::validation(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_params(path: Option<&Path>) -> Result<(CellParams, InputDigest), CliError> {
    let (text, d) = match path {
        Some(p) => {
            let bytes = read_bytes(p, "parameter file")?;
            let d = digest("params", Some(p), &bytes);
            let text = String::from_utf8(bytes)
                .map_err(|_| CliError::validation(format!("{} is not UTF-8", p.display())))?;
            (text, d)
        }
        None => (EXAMPLE_CELL.to_string(), digest("params", None, EXAMPLE_CELL.as_bytes())),
    };
    let params = parse_params(&text).map_err(|e| {
        let mut err = CliError::from(e);
        if let Some(p) = path {
            err.message = format!("{}: {}", p.display(), err.message);
        }
        err
    })?;
    Ok((params, d))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))
}

fn format(s: &str) -> Result<ReportFormat, CliError> {
    ReportFormat::parse(s).ok_or_else(|| CliError::validation(format!("unknown report format `{s}`")))
}

fn extension(f: ReportFormat) -> &'static str {
    match f {
        ReportFormat::Csv => "csv",
        ReportFormat::Text => "txt",
    }
}

pub fn realise(ctx: &Context, a: &RealiseArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (params, pd) = load_params(a.params.as_deref())?;
    let config = a.flags.resolve()?;
    let mut inputs = vec![pd];
    if let Some(c) = &a.flags.config {
        inputs.push(digest("config", Some(c), &read_bytes(c, "config")?));
    }
    config.validate()?;
    create_dir(&a.out)?;
    let grid = realise_grid(&params, &config, ExecMode::Parallel)?;
    let mut written = grid.save(&a.out)?;
    let sidecars: Vec<PathBuf> = written.iter().map(|p| p.with_extension(LABELS_EXTENSION)).collect();
    written.extend(sidecars);
    for (m, r) in grid.models.iter().zip(&grid.reports) {
        if let Some(r) = r {
            println!(
                "soc={:.3} T={:.2} K  {:.3} s  recon_err={:.3e}  radius={:.6}",
                m.soc,
                m.temp,
                r.wall_time.as_secs_f64(),
                r.reconstruction_error,
                r.radius_after
            );
        }
    }
    Manifest {
        command: "realise",
        version: env!("CARGO_PKG_VERSION"),
        threads: ctx.threads,
        seed: ctx.seed,
        config: ResolvedConfig::from(&config),
        inputs,
        outputs: relative(&a.out, &written),
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)
}

#[derive(Debug, Serialize)]
struct SimulateConfig {
    soc_init: f64,
    temp: f64,
    t_s: f64,
    v_min: f64,
    v_max: f64,
    series: u32,
    parallel: u32,
    motor_efficiency: f64,
    resampled: bool,
    steps: usize,
    flagged_steps: usize,
    final_soc: f64,
}

fn model_digests(dir: &Path) -> Result<Vec<InputDigest>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::validation(format!("cannot read models {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|x| x == MODEL_EXTENSION || x == LABELS_EXTENSION)
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(digest("model", Some(p), &read_bytes(p, "model")?)))
        .collect()
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (params, pd) = load_params(a.params.as_deref())?;
    let mut inputs = vec![pd];
    inputs.extend(model_digests(&a.models)?);
    let grid = ModelGrid::load(&a.models)?;
    let blended = BlendedGrid::new(&grid)?;
    let cycle = match &a.cycle {
        Some(p) => {
            inputs.push(digest("cycle", Some(p), &read_bytes(p, "cycle")?));
            DriveCycle::load(p)?
        }
        None => {
            inputs.push(digest("cycle", None, SYNTHETIC_CYCLE.as_bytes()));
            DriveCycle::synthetic()
        }
    };
    let t_s = blended.t_s();
    let resampled = !cycle.is_uniform(t_s);
    let cycle = if resampled {
        log::info!("resampling cycle onto {t_s} s");
        cycle.resample(t_s)?
    } else {
        cycle
    };
    let temp = a.temp.unwrap_or(params.temperature_ref);
    let config = SimulationConfig {
        v_min: a.v_min,
        v_max: a.v_max,
        pack: PackConfig {
            series: a.series,
            parallel: a.parallel,
            motor_efficiency: a.motor_efficiency,
        },
    };
    let trace = run_drive_cycle(&blended, &params, &cycle, a.soc_init, temp, &config)?;
    create_dir(&a.out)?;
    let path = a.out.join("trace.csv");
    trace.save_csv(&path)?;
    let (vmin, vmax) = trace
        .voltage
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!(
        "{} steps, voltage {vmin:.4}..{vmax:.4} V, {} flagged, final soc {:.4}",
        trace.len(),
        trace.flagged(),
        trace.final_soc
    );
    Manifest {
        command: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        threads: ctx.threads,
        seed: ctx.seed,
        config: SimulateConfig {
            soc_init: a.soc_init,
            temp,
            t_s,
            v_min: a.v_min,
            v_max: a.v_max,
            series: a.series,
            parallel: a.parallel,
            motor_efficiency: a.motor_efficiency,
            resampled,
            steps: trace.len(),
            flagged_steps: trace.flagged(),
            final_soc: trace.final_soc,
        },
        inputs,
        outputs: relative(&a.out, &[path]),
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)
}

#[derive(Debug, Serialize)]
struct BenchConfig {
    sizes: Vec<usize>,
    strategies: Vec<&'static str>,
    order: usize,
    outputs: usize,
    reps: usize,
}

pub fn bench(ctx: &Context, a: &BenchArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (params, pd) = load_params(a.params.as_deref())?;
    let fmt = format(&a.format)?;
    let strategies = a
        .strategies
        .iter()
        .map(|s| SvdStrategy::parse(s).ok_or_else(|| CliError::validation(format!("unknown SVD strategy `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = SvdBenchOptions {
        sizes: a.sizes.clone(),
        strategies,
        reps: a.reps,
        order: a.order,
        outputs: a.outputs,
        seed: ctx.seed,
    };
    let report = bench_svd(&params, &opts)?;
    create_dir(&a.out)?;
    let path = a.out.join(format!("svd_bench.{}", extension(fmt)));
    report.write(&path, fmt)?;
    print!("{}", report.to_text());
    Manifest {
        command: "bench",
        version: env!("CARGO_PKG_VERSION"),
        threads: ctx.threads,
        seed: ctx.seed,
        config: BenchConfig {
            sizes: opts.sizes.clone(),
            strategies: opts.strategies.iter().map(|s| s.as_str()).collect(),
            order: opts.order,
            outputs: opts.outputs,
            reps: opts.reps,
        },
        inputs: vec![pd],
        outputs: relative(&a.out, &[path]),
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)
}

#[derive(Debug, Serialize)]
struct SensitivityConfig {
    base: ResolvedConfig,
    soc: f64,
    temp: f64,
    reps: usize,
    bounds: (f64, f64),
}

pub fn sensitivity(ctx: &Context, a: &SensitivityArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (params, pd) = load_params(a.params.as_deref())?;
    let fmt = format(&a.format)?;
    let base = a.flags.resolve()?;
    let opts = SweepOptions {
        reps: a.reps,
        soc: a.at_soc,
        temp: a.at_temp,
        ..Default::default()
    };
    let report = sensitivity_sweep(&params, &base, &opts)?;
    create_dir(&a.out)?;
    let path = a.out.join(format!("sensitivity.{}", extension(fmt)));
    report.write(&path, fmt)?;
    print!("{}", report.to_text());
    Manifest {
        command: "sensitivity",
        version: env!("CARGO_PKG_VERSION"),
        threads: ctx.threads,
        seed: ctx.seed,
        config: SensitivityConfig {
            base: ResolvedConfig::from(&base),
            soc: opts.soc,
            temp: opts.temp,
            reps: opts.reps,
            bounds: opts.bounds,
        },
        inputs: vec![pd],
        outputs: relative(&a.out, &[path]),
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)
}
