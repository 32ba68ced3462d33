use std::sync::OnceLock;

use super::*;
use crate::cellparams::CellParams;
use crate::realisation::{realise_grid, ModelGrid, RealisationConfig};
use crate::ExecMode;

fn desk() -> &'static ModelGrid {
    static GRID: OnceLock<ModelGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let cfg = RealisationConfig {
            hankel_rows: 300,
            hankel_cols: 300,
            tf_sample_len: 0.5,
            order: 6,
            ..Default::default()
        };
        realise_grid(&CellParams::example(), &cfg, ExecMode::Parallel).unwrap()
    })
}

fn constant(current: f64, seconds: f64, t_s: f64) -> DriveCycle {
    let n = (seconds / t_s) as usize;
    DriveCycle::new(
        (0..n).map(|k| k as f64 * t_s).collect(),
        CycleSignal::Current(vec![current; n]),
    )
    .unwrap()
}

#[test]
fn grid_nodes_have_modal_forms() {
    let g = BlendedGrid::new(desk()).unwrap();
    assert_eq!(g.order(), 6);
    assert_eq!(g.socs(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn zero_current_holds_open_circuit() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    for soc in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let tr = run_drive_cycle(&g, &p, &constant(0.0, 30.0, g.t_s()), soc, 298.15, &SimulationConfig::default()).unwrap();
        assert!(tr.voltage.iter().all(|v| *v == p.ocv(soc)));
        assert!(tr.soc.iter().all(|s| *s == soc));
        // the bundled OCV dips just below 2.5 V at soc = 0
        let want = if (2.5..=4.2).contains(&p.ocv(soc)) { 0 } else { FLAG_VOLTAGE_LIMIT };
        assert!(tr.flags.iter().all(|f| *f == want));
    }
}

#[test]
fn constant_discharge_sags_monotonically() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let tr = run_drive_cycle(&g, &p, &constant(5.0, 180.0, g.t_s()), 0.5, 298.15, &SimulationConfig::default()).unwrap();
    assert!(tr.voltage[0] < p.ocv(0.5));
    // allow a few ulps of interpolation noise between steps
    for w in tr.voltage.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
    }
    assert_eq!(tr.flagged(), 0);
}

#[test]
fn coulomb_counting_identity() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let cyc = DriveCycle::synthetic().resample(g.t_s()).unwrap();
    let tr = run_drive_cycle(&g, &p, &cyc, 0.75, 298.15, &SimulationConfig::default()).unwrap();
    let charge: f64 = cyc.signal.values().iter().map(|u| u * g.t_s()).sum();
    let want = 0.75 - charge / (3600.0 * p.capacity_ah);
    assert!((tr.final_soc - want).abs() < 1e-12);
    assert_eq!(tr.len(), 7200);
}

#[test]
fn energy_bookkeeping() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let cyc = DriveCycle::synthetic().resample(g.t_s()).unwrap();
    let tr = run_drive_cycle(&g, &p, &cyc, 0.75, 298.15, &SimulationConfig::default()).unwrap();
    // trapezoid over the trace against the step-sum the trace reports
    let mut trap = 0.0;
    for k in 1..tr.len() {
        let dt = tr.time[k] - tr.time[k - 1];
        trap += 0.5 * dt * (tr.current[k] * tr.voltage[k] + tr.current[k - 1] * tr.voltage[k - 1]);
    }
    let sum = tr.energy();
    assert!(sum > 0.0);
    assert!((trap - sum).abs() <= 0.02 * sum.abs(), "{trap} vs {sum}");
}

#[test]
fn linear_outputs_superpose_on_a_fixed_model() {
    let g = BlendedGrid::new(desk()).unwrap();
    let m = g.blend(0.6, 298.15).unwrap();
    let u1: Vec<f64> = (0..400).map(|k| (k as f64 * 0.05).sin() * 4.0).collect();
    let u2: Vec<f64> = (0..400).map(|k| if k % 40 < 20 { 2.0 } else { -1.0 }).collect();
    let mix: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| 0.3 * a - 1.7 * b).collect();
    let (y1, y2, ym) = (simulate_linear(&m, &u1), simulate_linear(&m, &u2), simulate_linear(&m, &mix));
    for k in 0..400 {
        let want = &y1[k] * 0.3 - &y2[k] * 1.7;
        assert!((&ym[k] - &want).amax() <= 1e-10 * want.amax().max(1.0));
    }
}

#[test]
fn power_cycle_uses_lagged_voltage() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let n = 40;
    let cyc = DriveCycle::new(
        (0..n).map(|k| k as f64 * g.t_s()).collect(),
        CycleSignal::Power(vec![18_048.0; n]),
    )
    .unwrap();
    let cfg = SimulationConfig::default();
    let tr = run_drive_cycle(&g, &p, &cyc, 0.5, 298.15, &cfg).unwrap();
    let cell = cfg.pack.cell_power(18_048.0);
    assert!((tr.current[0] - cell / p.ocv(0.5)).abs() < 1e-12);
    for k in 1..n {
        assert!((tr.current[k] - cell / tr.voltage[k - 1]).abs() < 1e-12);
    }
}

#[test]
fn leaving_the_grid_is_an_error() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let err = run_drive_cycle(&g, &p, &constant(-5.0, 10.0, g.t_s()), 1.0, 298.15, &SimulationConfig::default());
    assert!(matches!(err, Err(crate::Error::OutOfHull { .. })));
    let off = run_drive_cycle(&g, &p, &constant(1.0, 10.0, 1.0), 0.5, 298.15, &SimulationConfig::default());
    assert!(off.unwrap_err().is_validation());
}

#[test]
fn trace_csv_layout() {
    let p = CellParams::example();
    let g = BlendedGrid::new(desk()).unwrap();
    let tr = run_drive_cycle(&g, &p, &constant(1.0, 2.0, g.t_s()), 0.5, 298.15, &SimulationConfig::default()).unwrap();
    let csv = tr.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines[0].starts_with("time_s,current_a,voltage_v,soc,flags,cse_neg_z0.0000"));
    assert_eq!(lines[0].split(',').count(), 5 + g.outputs());
    assert_eq!(tr.to_csv(), csv);
}
