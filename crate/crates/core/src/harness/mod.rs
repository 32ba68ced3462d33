//! Timing harness for the realisation pipeline: SVD strategy comparison
//! across Hankel sizes and a one-at-a-time sensitivity sweep.
//!
//! Cases run sequentially on the calling thread. Each case gets one
//! untimed warm-up run followed by at least [`MIN_REPS`] timed runs.

mod report;
mod svd_bench;
mod sweep;
mod timing;

pub use report::{BenchReport, CaseResult, ReportFormat, CSV_HEADER, MIN_REPS};
pub use svd_bench::{bench_svd, synthetic_markov, SvdBenchOptions};
pub use sweep::{sensitivity_sweep, sweep_cases, SweepOptions, SweepVariable};
pub use timing::{machine_descriptor, time_case};
