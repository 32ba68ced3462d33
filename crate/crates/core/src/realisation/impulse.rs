use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::{map_range, ExecMode};
use crate::tfgen::FrequencyResponse;

const HERMITIAN_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-9;

/// Real impulse response, one row per output; `G_0` is the feedthrough.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSequence {
    outputs: usize,
    len: usize,
    data: Vec<f64>,
}

impl MarkovSequence {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let len = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::Dimension("ragged Markov rows".into()));
        }
        Ok(Self {
            outputs: rows.len(),
            len,
            data: rows.concat(),
        })
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, output: usize, t: usize) -> f64 {
        self.data[output * self.len + t]
    }

    pub fn row(&self, output: usize) -> &[f64] {
        &self.data[output * self.len..(output + 1) * self.len]
    }

    /// `G_0` for every output.
    pub fn feedthrough(&self) -> Vec<f64> {
        (0..self.outputs).map(|o| self.get(o, 0)).collect()
    }

    /// Markov sequence at `q` times the period: `G_0` is kept and later
    /// terms become `q G_{q t}` (the fine impulse integrated over one coarse
    /// step).
    pub fn subsample(&self, q: usize) -> Self {
        if q <= 1 {
            return self.clone();
        }
        let len = (self.len - 1) / q + 1;
        let mut data = Vec::with_capacity(self.outputs * len);
        for o in 0..self.outputs {
            data.push(self.get(o, 0));
            data.extend((1..len).map(|t| q as f64 * self.get(o, q * t)));
        }
        Self {
            outputs: self.outputs,
            len,
            data,
        }
    }
}

/// Inverse DFT of each row of a Hermitian spectrum, scaled by `1/N`.
pub fn impulse_from_spectrum(rows: &[Vec<Complex64>], mode: ExecMode) -> Result<MarkovSequence> {
    let n = rows.first().map_or(0, |r| r.len());
    if n < 2 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("spectrum rows must share a length >= 2".into()));
    }
    for row in rows {
        let peak = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = row[0].im.abs();
        for f in 1..n {
            worst = worst.max((row[f] - row[n - f].conj()).norm());
        }
        if worst > HERMITIAN_TOL * peak {
            return Err(Error::NotHermitian(worst / peak));
        }
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    let out: Vec<Result<Vec<f64>>> = map_range(mode, rows.len(), |i| {
        let mut buf = rows[i].clone();
        fft.process(&mut buf);
        let peak = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let imag = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag > IMAG_TOL * peak {
            return Err(Error::ComplexImpulse(imag / peak));
        }
        Ok(buf.iter().map(|v| v.re * scale).collect())
    });
    MarkovSequence::from_rows(out.into_iter().collect::<Result<_>>()?)
}

pub fn impulse_response(fr: &FrequencyResponse, mode: ExecMode) -> Result<MarkovSequence> {
    impulse_from_spectrum(&fr.values, mode)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_spectrum_is_a_delta() {
        let g = impulse_from_spectrum(&[vec![c(2.5); 64]], ExecMode::Sequential).unwrap();
        assert!((g.get(0, 0) - 2.5).abs() < 1e-15);
        assert!((1..64).all(|t| g.get(0, t).abs() < 1e-15));
    }

    #[test]
    fn first_order_system_recovered() {
        // y = 0.7^(t-1) for t >= 1 has transfer 1/(z - 0.7)
        let n = 512;
        let spec: Vec<Complex64> = (0..n)
            .map(|f| 1.0 / (Complex64::from_polar(1.0, 2.0 * PI * f as f64 / n as f64) - 0.7))
            .collect();
        let g = impulse_from_spectrum(&[spec], ExecMode::Sequential).unwrap();
        assert!(g.get(0, 0).abs() < 1e-12);
        for t in 1..n / 4 {
            assert!((g.get(0, t) - 0.7f64.powi(t as i32 - 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut spec = vec![c(1.0); 16];
        spec[3] = Complex64::new(1.0, 0.5);
        assert!(matches!(
            impulse_from_spectrum(&[spec], ExecMode::Sequential),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn subsample_scales_and_keeps_feedthrough() {
        let g = MarkovSequence::from_rows(vec![(0..10).map(|t| t as f64).collect()]).unwrap();
        let h = g.subsample(3);
        assert_eq!(h.row(0), &[0.0, 9.0, 18.0, 27.0]);
        let g = MarkovSequence::from_rows(vec![vec![5.0, 1.0, 1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(g.subsample(2).row(0), &[5.0, 2.0, 2.0]);
    }
}
