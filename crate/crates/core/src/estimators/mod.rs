//! Reconstruction estimators and the fitted-model format shared with the
//! baselines.

mod fdp;
mod gprr;
mod krr;
mod params;
mod replication;
mod ridge;

pub use fdp::{fit_fdp, FdpFit};
pub use gprr::fit_gprr;
pub use krr::{fit_krr, fit_krr_gcv};
pub(crate) use krr::{gls, kriging_fit, regression_check, KernelSpectrum};
pub use params::{estimate_kernel_params, KernelParamEstimate, KernelParamOptions, ParamCriterion};
pub use replication::fit_replication;
pub use ridge::{
    default_lambda_grid, gcv, log_grid, gcv_from_parts, ridge_reconstruct, select_lambda, GcvPoint,
    LambdaSelection, RidgePath,
};
pub(crate) use ridge::{gcv_from_dof, pick};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Result};
use crate::interpolators::{
    fit_cubic_spline, KernelExpansion, KnotSet, LagrangeInterpolator, RegressionBasis,
    SplineBoundary,
};
use crate::kernels::KernelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gprr,
    Krr,
    Fdp,
    Replication,
    Gpr,
    Nystrom,
    Spgp,
    Eb,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gprr => "gprr",
            Method::Krr => "krr",
            Method::Fdp => "fdp",
            Method::Replication => "replication",
            Method::Gpr => "gpr",
            Method::Nystrom => "nystrom",
            Method::Spgp => "spgp",
            Method::Eb => "eb",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gprr" => Method::Gprr,
            "krr" => Method::Krr,
            "fdp" => Method::Fdp,
            "replication" => Method::Replication,
            "gpr" => Method::Gpr,
            "nystrom" => Method::Nystrom,
            "spgp" => Method::Spgp,
            "eb" => Method::Eb,
            other => return Err(invalid(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolatorKind {
    Lagrange,
    Spline,
    /// `g(x)' beta + r(x)' w` with an arbitrary center set.
    Kernel,
    /// Kriging interpolator through the knots.
    Gp,
}

/// How the penalty weight is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum LambdaPolicy {
    /// No penalty (`lambda = 0`).
    None,
    Fixed { lambda: f64 },
    Gcv { grid: Vec<f64> },
}

impl LambdaPolicy {
    pub fn gcv_default() -> Self {
        LambdaPolicy::Gcv {
            grid: default_lambda_grid(),
        }
    }

    /// No penalty when `m <= n / 5`, otherwise GCV over the default grid.
    pub fn auto(m: usize, n: usize) -> Self {
        if 5 * m <= n {
            LambdaPolicy::None
        } else {
            Self::gcv_default()
        }
    }

    pub(crate) fn fixed_value(&self) -> Result<Option<f64>> {
        match self {
            LambdaPolicy::None => Ok(Some(0.0)),
            LambdaPolicy::Fixed { lambda } if *lambda >= 0.0 && lambda.is_finite() => {
                Ok(Some(*lambda))
            }
            LambdaPolicy::Fixed { .. } => Err(invalid("lambda must be finite and nonnegative")),
            LambdaPolicy::Gcv { grid } if grid.is_empty() => Err(invalid("lambda grid is empty")),
            LambdaPolicy::Gcv { .. } => Ok(None),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// GCV at the chosen lambda; absent when undefined (e.g. interpolation).
    pub gcv: Option<f64>,
    /// Effective degrees of freedom `trace(H)`.
    pub trace: Option<f64>,
    pub jitter: f64,
    pub iterations: usize,
}

impl FitDiagnostics {
    pub(crate) fn new(gcv: f64, trace: f64, jitter: f64) -> Self {
        Self {
            gcv: gcv.is_finite().then_some(gcv),
            trace: trace.is_finite().then_some(trace),
            jitter,
            iterations: 1,
        }
    }
}

/// A fitted reconstruction `f(x) = I(x; A, gamma_hat)` (or a baseline stored
/// in the same form). Immutable; prediction is a pure function of the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub method: Method,
    pub interpolator: InterpolatorKind,
    pub knots: KnotSet,
    /// Estimated function values at the knots.
    pub gamma_hat: Vec<f64>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub g_kind: RegressionBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spline_boundary: Option<SplineBoundary>,
    /// Coefficients used for prediction by kernel-based models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<KernelExpansion>,
    #[serde(default)]
    pub diagnostics: FitDiagnostics,
}

impl FittedModel {
    pub fn dim(&self) -> usize {
        self.knots.dim()
    }

    /// Structural checks for models read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.gamma_hat.len() != self.knots.len() {
            return Err(dims(format!(
                "{} fitted values for {} knots",
                self.gamma_hat.len(),
                self.knots.len()
            )));
        }
        match self.interpolator {
            InterpolatorKind::Lagrange | InterpolatorKind::Spline if self.dim() != 1 => {
                Err(invalid("polynomial and spline models are one-dimensional"))
            }
            InterpolatorKind::Kernel | InterpolatorKind::Gp => match &self.expansion {
                Some(e) if e.dim() == self.dim() => Ok(()),
                Some(_) => Err(dims("expansion and knots disagree on dimension")),
                None => Err(invalid("kernel model has no expansion coefficients")),
            },
            _ => Ok(()),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: FittedModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const PARALLEL_ROWS: usize = 4096;

fn map_rows<F>(x: &DMatrix<f64>, f: F) -> DVector<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = x.ncols().max(1);
    let rm = crate::kernels::row_major(x);
    let out: Vec<f64> = if x.nrows() >= PARALLEL_ROWS {
        rm.par_chunks(d).map(&f).collect()
    } else {
        rm.chunks(d).map(&f).collect()
    };
    DVector::from_vec(out)
}

/// Evaluates the fitted surface at the rows of `x`.
pub fn predict(model: &FittedModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != model.dim() {
        return Err(dims(format!(
            "points have {} columns, model expects {}",
            x.ncols(),
            model.dim()
        )));
    }
    if x.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    model.validate()?;
    match model.interpolator {
        InterpolatorKind::Lagrange => {
            let knots = model.knots.as_1d().unwrap_or_default();
            let li = LagrangeInterpolator::new(&knots)?;
            let gamma = &model.gamma_hat;
            Ok(map_rows(x, |p| li.eval(gamma, p[0]).unwrap_or(f64::NAN)))
        }
        InterpolatorKind::Spline => {
            let knots = model.knots.as_1d().unwrap_or_default();
            let s = fit_cubic_spline(
                &knots,
                &model.gamma_hat,
                model.spline_boundary.unwrap_or_default(),
            )?;
            Ok(map_rows(x, |p| s.eval(p[0])))
        }
        InterpolatorKind::Kernel | InterpolatorKind::Gp => {
            let e = model
                .expansion
                .as_ref()
                .ok_or_else(|| invalid("kernel model has no expansion coefficients"))?;
            Ok(map_rows(x, |p| e.eval_unchecked(p)))
        }
    }
}

pub(crate) fn check_data(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(crate::Error::LengthMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(invalid("empty data"));
    }
    if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(crate::Error::DegenerateData("non-finite values in data".into()));
    }
    Ok(())
}
