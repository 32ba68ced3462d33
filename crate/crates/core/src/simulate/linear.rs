//! Linear state update with the origin-pole accumulator.

use nalgebra::{DMatrix, DVector};

use crate::realisation::StateSpaceModel;

/// `x' = A x + B u`, `y = C x + D u + res0 (q + T_s u / 2)`, where `q` is
/// the charge passed before the current step. The half-step term is the
/// bilinear image of `res0 / s`, matching how the rest of the model was
/// sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub res0: DVector<f64>,
    pub t_s: f64,
}

impl LinearModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn zeros(order: usize, outputs: usize, t_s: f64) -> Self {
        Self {
            a: DMatrix::zeros(order, order),
            b: DVector::zeros(order),
            c: DMatrix::zeros(outputs, order),
            d: DVector::zeros(outputs),
            res0: DVector::zeros(outputs),
            t_s,
        }
    }
}

impl From<&StateSpaceModel> for LinearModel {
    fn from(m: &StateSpaceModel) -> Self {
        Self {
            a: m.a.clone(),
            b: m.b.clone(),
            c: m.c.clone(),
            d: m.d.clone(),
            res0: m.res0.clone(),
            t_s: m.t_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub x: DVector<f64>,
    /// Charge passed so far, A s.
    pub charge: f64,
}

impl LinearState {
    pub fn zeros(order: usize) -> Self {
        Self {
            x: DVector::zeros(order),
            charge: 0.0,
        }
    }
}

/// One step; returns the next state and the debiased outputs at this step.
pub fn step(model: &LinearModel, state: &LinearState, u: f64) -> (LinearState, DVector<f64>) {
    let mut y = &model.c * &state.x;
    y.axpy(u, &model.d, 1.0);
    y.axpy(state.charge + 0.5 * model.t_s * u, &model.res0, 1.0);
    let mut x = &model.a * &state.x;
    x.axpy(u, &model.b, 1.0);
    let next = LinearState {
        x,
        charge: state.charge + model.t_s * u,
    };
    (next, y)
}

/// Outputs for an input sequence from the zero state.
pub fn simulate_linear(model: &LinearModel, inputs: &[f64]) -> Vec<DVector<f64>> {
    let mut state = LinearState::zeros(model.order());
    inputs
        .iter()
        .map(|&u| {
            let (next, y) = step(model, &state, u);
            state = next;
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(res0: f64) -> LinearModel {
        LinearModel {
            a: DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.5]),
            b: DVector::from_vec(vec![1.0, -0.5]),
            c: DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.3, 2.0, -1.0, 1.0]),
            d: DVector::from_vec(vec![0.2, 0.0, -0.1]),
            res0: DVector::from_vec(vec![res0, 0.0, 0.0]),
            t_s: 0.25,
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let m = model(1.5);
        let s = LinearState::zeros(2);
        let (next, y) = step(&m, &s, 0.0);
        assert_eq!(next, s);
        assert!(y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn impulse_gives_markov_sequence() {
        let m = model(0.0);
        let mut u = vec![0.0; 6];
        u[0] = 1.0;
        let ys = simulate_linear(&m, &u);
        assert_eq!(ys[0], m.d);
        let mut x = m.b.clone();
        for y in &ys[1..] {
            assert!((y - &m.c * &x).norm() < 1e-15);
            x = &m.a * x;
        }
    }

    #[test]
    fn accumulator_ramps_with_constant_input() {
        let mut m = model(2.0);
        m.c.fill(0.0);
        m.d.fill(0.0);
        let ys = simulate_linear(&m, &[3.0; 10]);
        for (k, y) in ys.iter().enumerate() {
            let want = 2.0 * 3.0 * 0.25 * (k as f64 + 0.5);
            assert!((y[0] - want).abs() < 1e-13);
        }
        let slope = ys[5][0] - ys[4][0];
        assert!((slope - 2.0 * 3.0 * 0.25).abs() < 1e-13);
    }

    #[test]
    fn superposition() {
        let m = model(0.7);
        let u1: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let u2: Vec<f64> = (0..50).map(|k| if k % 7 < 3 { 1.0 } else { -0.4 }).collect();
        let (a, b) = (2.5, -1.25);
        let mix: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| a * x + b * y).collect();
        let (y1, y2, ym) = (simulate_linear(&m, &u1), simulate_linear(&m, &u2), simulate_linear(&m, &mix));
        for k in 0..50 {
            let want = &y1[k] * a + &y2[k] * b;
            assert!((&ym[k] - want).norm() <= 1e-10 * (1.0 + ym[k].norm()));
        }
    }
}
