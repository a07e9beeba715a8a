use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};

/// End conditions for the interpolating cubic spline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineBoundary {
    /// Third derivative continuous across the second and penultimate knots.
    #[default]
    NotAKnot,
    /// Zero second derivative at both ends.
    Natural,
}

/// Piecewise cubic `y_i + b t + c t^2 + d t^3` with `t = x - a_i` on each
/// interval `[a_i, a_{i+1}]`; the end pieces are extended outside the knots.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineCoefficients {
    knots: Vec<f64>,
    pieces: Vec<[f64; 4]>,
    boundary: SplineBoundary,
}

impl SplineCoefficients {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn boundary(&self) -> SplineBoundary {
        self.boundary
    }

    /// Coefficients `[y_i, b, c, d]` of interval `i`.
    pub fn piece(&self, i: usize) -> [f64; 4] {
        self.pieces[i]
    }

    fn locate(&self, x: f64) -> usize {
        let last = self.pieces.len() - 1;
        match self.knots.partition_point(|&a| a <= x) {
            0 => 0,
            k => (k - 1).min(last),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let [a, b, c, d] = self.pieces[i];
        let t = x - self.knots[i];
        a + t * (b + t * (c + t * d))
    }
}

/// Cubic spline through `(knots[i], gamma[i])`; `knots` must be strictly
/// increasing. Two knots give the line, three the parabola.
pub fn fit_cubic_spline(
    knots: &[f64],
    gamma: &[f64],
    boundary: SplineBoundary,
) -> Result<SplineCoefficients> {
    let m = knots.len();
    if gamma.len() != m {
        return Err(dims(format!("{} values for {m} knots", gamma.len())));
    }
    if m < 2 {
        return Err(invalid("a spline needs at least two knots"));
    }
    for w in knots.windows(2) {
        if w[1] == w[0] {
            return Err(Error::DuplicateKnots);
        }
        if !(w[1] > w[0]) {
            return Err(Error::UnsortedKnots);
        }
    }
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = gamma
        .windows(2)
        .zip(&h)
        .map(|(g, hi)| (g[1] - g[0]) / hi)
        .collect();
    let second = second_derivatives(&h, &slope, boundary);
    let pieces = (0..m - 1)
        .map(|i| {
            let (mi, mj) = (second[i], second[i + 1]);
            [
                gamma[i],
                slope[i] - h[i] * (2.0 * mi + mj) / 6.0,
                mi / 2.0,
                (mj - mi) / (6.0 * h[i]),
            ]
        })
        .collect();
    Ok(SplineCoefficients {
        knots: knots.to_vec(),
        pieces,
        boundary,
    })
}

pub fn fit_natural_spline(knots: &[f64], gamma: &[f64]) -> Result<SplineCoefficients> {
    fit_cubic_spline(knots, gamma, SplineBoundary::Natural)
}

/// Second derivatives at the knots.
fn second_derivatives(h: &[f64], slope: &[f64], boundary: SplineBoundary) -> Vec<f64> {
    let m = h.len() + 1;
    if m == 2 {
        return vec![0.0; 2];
    }
    if m == 3 && boundary == SplineBoundary::NotAKnot {
        let c = 2.0 * (slope[1] - slope[0]) / (h[0] + h[1]);
        return vec![c; 3];
    }
    // unknowns M_1 .. M_{m-2}
    let k = m - 2;
    let mut sub = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut sup = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for r in 0..k {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
    }
    if boundary == SplineBoundary::NotAKnot {
        let (h0, h1) = (h[0], h[1]);
        diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        sup[0] = (h1 * h1 - h0 * h0) / h1;
        let (a, b) = (h[m - 3], h[m - 2]);
        diag[k - 1] = (a + b) * (2.0 * a + b) / a;
        sub[k - 1] = (a * a - b * b) / a;
    }
    let inner = thomas(&sub, &diag, &sup, &rhs);
    let mut out = vec![0.0; m];
    out[1..m - 1].copy_from_slice(&inner);
    if boundary == SplineBoundary::NotAKnot {
        let r0 = h[0] / h[1];
        out[0] = out[1] * (1.0 + r0) - out[2] * r0;
        let r1 = h[m - 2] / h[m - 3];
        out[m - 1] = out[m - 2] * (1.0 + r1) - out[m - 3] * r1;
    }
    out
}

/// Tridiagonal solve without pivoting; the spline systems are diagonally
/// dominant.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}
