use nalgebra::DVector;

use super::{gcv_from_parts, pick, FitDiagnostics, FittedModel, GcvPoint, InterpolatorKind, LambdaPolicy, Method};
use crate::error::{invalid, Result};
use crate::interpolators::{fit_cubic_spline, KnotSet, RegressionBasis, SplineBoundary, SplineCoefficients};
use crate::numerics::{banded_hat_trace, BandedSpdMatrix, TraceEstimate, TracePolicy};

/// Second-difference penalized fit on the equispaced grid `x_i = i/(n-1)`.
#[derive(Clone, Debug)]
pub struct FdpFit {
    pub gamma_hat: Vec<f64>,
    pub lambda: f64,
    pub design: Vec<f64>,
    pub spline: SplineCoefficients,
    pub gcv: f64,
    pub trace: TraceEstimate,
}

/// `y` split into its least-squares line over the index and the remainder.
struct Split {
    line: Vec<f64>,
    rest: Vec<f64>,
}

fn solve(y: &DVector<f64>, split: &Split, lambda: f64, trace: TracePolicy) -> Result<(Vec<f64>, TraceEstimate, f64)> {
    let n = y.len();
    let ldl = BandedSpdMatrix::second_difference_system(n, lambda)?.factor()?;
    // M annihilates lines, so only the remainder is smoothed
    let gamma: Vec<f64> = ldl.solve(&split.rest)?.iter().zip(&split.line).map(|(r, l)| r + l).collect();
    let est = banded_hat_trace(&ldl, trace)?;
    let rss: f64 = y.iter().zip(&gamma).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((gamma, est, gcv_from_parts(rss, est.value, n)))
}

/// Least-squares line over the index `0..n`, evaluated at each index.
fn index_line(y: &DVector<f64>) -> Vec<f64> {
    let n = y.len() as f64;
    let mid = (n - 1.0) / 2.0;
    let mean = y.mean();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let t = i as f64 - mid;
        sxy += t * (v - mean);
        sxx += t * t;
    }
    let slope = sxy / sxx;
    (0..y.len()).map(|i| mean + slope * (i as f64 - mid)).collect()
}

/// Minimizes `|y - gamma|^2 / n + lambda |M gamma|^2` in O(n) per lambda and
/// rebuilds the curve with a cubic spline through `(x_i, gamma_i)`.
pub fn fit_fdp(
    y: &DVector<f64>,
    policy: &LambdaPolicy,
    trace: TracePolicy,
    boundary: SplineBoundary,
) -> Result<FdpFit> {
    let n = y.len();
    if n < 3 {
        return Err(invalid(format!("finite differences need n >= 3, got {n}")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::DegenerateData("non-finite responses".into()));
    }
    let line = index_line(y);
    let rest = y.iter().zip(&line).map(|(a, b)| a - b).collect();
    let split = Split { line, rest };
    let lambda = match (policy.fixed_value()?, policy) {
        (Some(l), _) => l,
        (None, LambdaPolicy::Gcv { grid }) => {
            let curve = grid
                .iter()
                .map(|&lambda| GcvPoint {
                    lambda,
                    gcv: solve(y, &split, lambda, trace).map_or(f64::INFINITY, |r| r.2),
                })
                .collect();
            pick(curve)?.lambda
        }
        _ => unreachable!(),
    };
    let (gamma_hat, est, gcv) = solve(y, &split, lambda, trace)?;
    let design: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let spline = fit_cubic_spline(&design, &gamma_hat, boundary)?;
    Ok(FdpFit {
        gamma_hat,
        lambda,
        design,
        spline,
        gcv,
        trace: est,
    })
}

impl FdpFit {
    pub fn to_model(&self) -> Result<FittedModel> {
        Ok(FittedModel {
            method: Method::Fdp,
            interpolator: InterpolatorKind::Spline,
            knots: KnotSet::from_1d(&self.design)?,
            gamma_hat: self.gamma_hat.clone(),
            lambda: self.lambda,
            kernel: None,
            g_kind: RegressionBasis::None,
            spline_boundary: Some(self.spline.boundary()),
            expansion: None,
            diagnostics: FitDiagnostics::new(self.gcv, self.trace.value, 0.0),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.spline.eval(x)
    }
}
