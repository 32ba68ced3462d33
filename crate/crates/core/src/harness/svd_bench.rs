//! Truncated-SVD timing across Hankel sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{BenchReport, CaseResult, MIN_REPS};
use super::timing::{machine_descriptor, time_case};
use crate::cellparams::CellParams;
use crate::error::{Error, Result};
use crate::realisation::pipeline::sample_impulse;
use crate::realisation::{
    build_hankel, dense_svd, truncated_svd, HankelOperator, MarkovSequence, RealisationConfig, SvdStrategy,
};
use crate::tfgen::TfRequest;
use crate::ExecMode;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdBenchOptions {
    /// Square Hankel block dimensions to time.
    pub sizes: Vec<usize>,
    pub strategies: Vec<SvdStrategy>,
    pub reps: usize,
    pub order: usize,
    /// Leading output rows of the impulse response to keep.
    pub outputs: usize,
    /// Seeds the relative perturbation applied to the impulse response.
    pub seed: u64,
}

impl Default for SvdBenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![1000, 2000, 4000],
            strategies: vec![SvdStrategy::Iterative, SvdStrategy::Dense],
            reps: MIN_REPS,
            order: 8,
            outputs: 1,
            seed: 0,
        }
    }
}

/// Impulse response of the bundled-style cell at soc 0.5, long enough for
/// the largest size, with a seeded relative perturbation of 1e-9.
pub fn synthetic_markov(params: &CellParams, largest: usize, outputs: usize, seed: u64) -> Result<MarkovSequence> {
    let mut cfg = RealisationConfig::default();
    let needed = (2 * largest + 1) as f64 / cfg.sample_rate;
    cfg.tf_sample_len = (1.1 * needed / 3600.0).max(1.0);
    cfg.hankel_rows = largest;
    cfg.hankel_cols = largest;
    let sp = params.setpoint(0.5, params.temperature_ref)?;
    let req = TfRequest::uniform(params, sp, cfg.electrode_points, cfg.electrolyte_points, cfg.modes);
    let (g, _, _) = sample_impulse(params, &cfg, &req, ExecMode::Sequential)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..outputs.min(g.outputs()))
        .map(|o| {
            g.row(o)
                .iter()
                .map(|v| v * (1.0 + 1e-9 * rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    MarkovSequence::from_rows(rows)
}

pub fn bench_svd(params: &CellParams, opts: &SvdBenchOptions) -> Result<BenchReport> {
    if opts.reps < MIN_REPS {
        return Err(Error::Config(format!(
            "reps: at least {MIN_REPS} repetitions are required, got {}",
            opts.reps
        )));
    }
    if opts.sizes.is_empty() || opts.strategies.is_empty() || opts.outputs == 0 {
        return Err(Error::Config("bench needs at least one size, strategy and output".into()));
    }
    if let Some(s) = opts.sizes.iter().find(|&&s| s < opts.order) {
        return Err(Error::Config(format!("size {s} is below order {}", opts.order)));
    }
    let largest = *opts.sizes.iter().max().expect("non-empty");
    let g = synthetic_markov(params, largest, opts.outputs, opts.seed)?;
    let mut cases = Vec::new();
    for &n in &opts.sizes {
        for &strategy in &opts.strategies {
            let case = CaseResult::new(format!("n={n}/{}", strategy.as_str()), "size", strategy.as_str());
            log::info!("svd case {}", case.case);
            let m = opts.order;
            cases.push(time_case(case, opts.reps, || match strategy {
                SvdStrategy::Iterative => {
                    let op = HankelOperator::new(&g, n, n, ExecMode::Sequential)?;
                    truncated_svd(&op, m, SvdStrategy::Iterative)
                }
                SvdStrategy::Dense => {
                    let (h, _) = build_hankel(&g, n, n)?;
                    dense_svd(&h, m)
                }
            }));
        }
    }
    Ok(BenchReport {
        title: format!(
            "truncated SVD, order {}, {} output(s), seed {}",
            opts.order, opts.outputs, opts.seed
        ),
        machine: machine_descriptor(),
        cases,
    })
}
