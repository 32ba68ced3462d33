use crate::error::{Error, Result};

/// Interpolation scheme for a tabulated open-circuit potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Natural cubic spline.
    Cubic,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Linear => "linear",
            Interpolation::Cubic => "cubic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(Interpolation::Linear),
            "cubic" => Some(Interpolation::Cubic),
            _ => None,
        }
    }
}

/// Open-circuit potential as a function of surface stoichiometry.
///
/// Outside the tabulated range the curve is extended linearly with the end
/// slope.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpCurve {
    stoich: Vec<f64>,
    potential: Vec<f64>,
    interpolation: Interpolation,
    // second derivatives at the knots (cubic only)
    curvature: Vec<f64>,
}

impl OcpCurve {
    pub fn new(
        name: &str,
        stoich: Vec<f64>,
        potential: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let bad = |message: String| Error::MalformedOcp {
            table: name.to_string(),
            message,
        };
        if stoich.len() != potential.len() {
            return Err(bad("column lengths differ".into()));
        }
        if stoich.len() < 4 {
            return Err(bad(format!("need at least 4 points, got {}", stoich.len())));
        }
        if stoich.iter().chain(&potential).any(|v| !v.is_finite()) {
            return Err(bad("non-finite entry".into()));
        }
        if stoich.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(bad("stoichiometry outside [0, 1]".into()));
        }
        if stoich.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("stoichiometry grid is not strictly increasing".into()));
        }
        let curvature = match interpolation {
            Interpolation::Cubic => natural_spline_curvature(&stoich, &potential),
            Interpolation::Linear => vec![0.0; stoich.len()],
        };
        Ok(Self {
            stoich,
            potential,
            interpolation,
            curvature,
        })
    }

    pub fn stoich(&self) -> &[f64] {
        &self.stoich
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn range(&self) -> (f64, f64) {
        (self.stoich[0], *self.stoich.last().unwrap())
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.stoich.len();
        match self.stoich.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Potential in V and its derivative in V per unit stoichiometry.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.range();
        if x < lo || x > hi {
            let x0 = x.clamp(lo, hi);
            let (u0, du0) = self.eval_with_slope(x0);
            return (u0 + du0 * (x - x0), du0);
        }
        let i = self.segment(x);
        let (x0, x1) = (self.stoich[i], self.stoich[i + 1]);
        let (y0, y1) = (self.potential[i], self.potential[i + 1]);
        let h = x1 - x0;
        match self.interpolation {
            Interpolation::Linear => (y0 + (y1 - y0) * (x - x0) / h, (y1 - y0) / h),
            Interpolation::Cubic => {
                let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
                let a = (x1 - x) / h;
                let b = (x - x0) / h;
                let y = a * y0
                    + b * y1
                    + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
                let dy = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                    + (3.0 * b * b - 1.0) / 6.0 * h * m1;
                (y, dy)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_slope(x).0
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.eval_with_slope(x).1
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)`.
fn natural_spline_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    // Thomas algorithm on the interior equations
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}
