use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn cidra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cidra"))
        .args(args)
        .env_remove("CIDRA_THREADS")
        .output()
        .expect("spawn cidra")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Desk grid realised once per test binary.
fn desk_models() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = cidra(&[
            "realise",
            "--hankel",
            "400",
            "--tlen-hours",
            "1",
            "--order",
            "6",
            "--out",
            p(dir.path()),
        ]);
        ok(&out);
        dir
    })
    .path()
}

fn models_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cidr"))
        .collect();
    v.sort();
    v
}

fn trace_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn realise_writes_one_model_per_soc_and_manifest() {
    let dir = desk_models();
    assert_eq!(models_in(dir).len(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "realise");
    assert_eq!(manifest["config"]["hankel_rows"], 400);
    assert_eq!(manifest["config"]["order"], 6);
    assert_eq!(manifest["inputs"][0]["source"], "bundled");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 10);
}

#[test]
fn missing_params_is_a_validation_error() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = cidra(&[
        "realise",
        "--params",
        "/nonexistent/cell.params",
        "--out",
        p(out_dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cell.params"));
}

#[test]
fn bad_config_values_exit_two() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = cidra(&["realise", "--order", "0", "--out", p(out_dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = cidra(&["realise", "--svd", "magic", "--out", p(out_dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synthetic_cycle_simulates_every_step() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = cidra(&["simulate", "--models", p(desk_models()), "--out", p(out_dir.path())]);
    ok(&out);
    let rows = trace_rows(out_dir.path());
    assert_eq!(rows.len(), 7200);
    for r in &rows {
        let v: f64 = r[2].parse().unwrap();
        assert!((2.5..=4.2).contains(&v), "{v}");
        assert_eq!(r[4], "0");
    }
    let manifest = std::fs::read_to_string(out_dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"steps\": 7200"));
}

#[test]
fn zero_current_holds_voltage() {
    let tmp = tempfile::tempdir().unwrap();
    let cycle = tmp.path().join("rest.csv");
    let mut csv = String::from("time_s,current_a\n");
    for i in 0..400 {
        csv.push_str(&format!("{},0\n", i as f64 * 0.25));
    }
    std::fs::write(&cycle, csv).unwrap();
    let out_dir = tmp.path().join("out");
    ok(&cidra(&[
        "simulate",
        "--models",
        p(desk_models()),
        "--cycle",
        p(&cycle),
        "--out",
        p(&out_dir),
    ]));
    let rows = trace_rows(&out_dir);
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r[2] == rows[0][2]));
}

#[test]
fn power_cycle_is_converted_and_resampled() {
    let tmp = tempfile::tempdir().unwrap();
    let cycle = tmp.path().join("power.csv");
    let mut csv = String::from("time_s,power_w\n");
    for i in 0..=120 {
        let p = if i < 60 { 20_000.0 } else { -8_000.0 };
        csv.push_str(&format!("{i},{p}\n"));
    }
    std::fs::write(&cycle, csv).unwrap();
    let out_dir = tmp.path().join("out");
    ok(&cidra(&[
        "simulate",
        "--models",
        p(desk_models()),
        "--cycle",
        p(&cycle),
        "--out",
        p(&out_dir),
    ]));
    let rows = trace_rows(&out_dir);
    assert_eq!(rows.len(), 480);
    let i_drive: f64 = rows[100][1].parse().unwrap();
    let i_regen: f64 = rows[300][1].parse().unwrap();
    assert!(i_drive > 0.0 && i_regen < 0.0);
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"resampled\": true"));
}

#[test]
fn soc_outside_grid_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let models = tmp.path().join("models");
    ok(&cidra(&[
        "realise",
        "--hankel",
        "200",
        "--tlen-hours",
        "0.25",
        "--order",
        "5",
        "--soc",
        "0.8,0.4",
        "--out",
        p(&models),
    ]));
    let out = cidra(&[
        "simulate",
        "--models",
        p(&models),
        "--soc-init",
        "0.95",
        "--out",
        p(&tmp.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bench_rejects_too_few_reps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cidra(&["bench", "--reps", "3", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = cidra(&["sensitivity", "--reps", "3", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_bench_report() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&cidra(&[
        "bench",
        "--sizes",
        "40,60,80",
        "--strategies",
        "iterative",
        "--out",
        p(tmp.path()),
    ]));
    let csv = std::fs::read_to_string(tmp.path().join("svd_bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].starts_with("# machine: "));
    assert_eq!(lines[2], "case,variable,bound,reps,min_s,median_s,mean_s,peak_mem_bytes");
    assert_eq!(lines.len(), 6);
    assert!(lines[3].starts_with("n=40/iterative,size,iterative,6,"));
    let manifest = std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"threads\": 1"));
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for (k, threads) in ["1", "2"].iter().enumerate() {
        let models = tmp.path().join(format!("m{k}"));
        ok(&cidra(&[
            "--threads",
            threads,
            "realise",
            "--hankel",
            "200",
            "--tlen-hours",
            "0.25",
            "--order",
            "5",
            "--soc",
            "0.8,0.4",
            "--out",
            p(&models),
        ]));
        let sim = tmp.path().join(format!("s{k}"));
        ok(&cidra(&[
            "simulate",
            "--models",
            p(&models),
            "--soc-init",
            "0.7",
            "--out",
            p(&sim),
        ]));
        let mut bytes: Vec<Vec<u8>> = models_in(&models).iter().map(|f| std::fs::read(f).unwrap()).collect();
        bytes.push(std::fs::read(sim.join("trace.csv")).unwrap());
        outs.push(bytes);
    }
    assert_eq!(outs[0], outs[1]);
}
