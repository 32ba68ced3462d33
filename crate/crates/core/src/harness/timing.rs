//! Wall-clock repetition timing, machine description and peak memory.

use std::time::Instant;

use super::report::CaseResult;

/// `os/arch, N logical cores, CPU model` as far as the platform reveals.
pub fn machine_descriptor() -> String {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    format!(
        "{}/{}, {cores} logical cores, {cpu}, cidra-core {}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        env!("CARGO_PKG_VERSION")
    )
}

/// Reset the kernel's resident-set high-water mark where supported.
fn reset_peak() {
    let _ = std::fs::write("/proc/self/clear_refs", "5");
}

/// Resident-set high-water mark in bytes, Linux only.
fn read_peak() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

/// Run `f` once as warm-up and then `reps` timed times. The first error
/// stops the case and is recorded.
pub fn time_case<F, T, E>(mut case: CaseResult, reps: usize, mut f: F) -> CaseResult
where
    F: FnMut() -> std::result::Result<T, E>,
    E: std::fmt::Display,
{
    reset_peak();
    for i in 0..=reps {
        let start = Instant::now();
        let out = f();
        let dt = start.elapsed().as_secs_f64();
        match out {
            Ok(v) => drop(v),
            Err(e) => {
                case.error = Some(e.to_string());
                break;
            }
        }
        if i == 0 {
            case.warmup = Some(dt);
        } else {
            case.samples.push(dt);
        }
    }
    case.peak_mem_bytes = read_peak();
    case
}
