use nalgebra::{DMatrix, DVector};

use super::{
    check_data, gcv_from_parts, kriging_fit, ridge_reconstruct, select_lambda, FitDiagnostics, FittedModel,
    InterpolatorKind, LambdaPolicy, Method, RidgePath,
};
use crate::error::{dims, Result};
use crate::interpolators::{GpBasis, KnotSet, RegressionBasis};
use crate::kernels::KernelSpec;

/// Gaussian-process reconstruction regression: ridge reconstruction with the
/// kriging basis as interpolator and its RKHS norm as penalty.
///
/// When the knots are exactly the design points the design matrix is the
/// identity and `(I + n lambda V) gamma = y` is solved in the equivalent
/// form `gamma = G beta + R (R + n lambda I)^{-1} (y - G beta)`.
pub fn fit_gprr(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
    g_kind: RegressionBasis,
    policy: &LambdaPolicy,
) -> Result<FittedModel> {
    check_data(x, y)?;
    if x.ncols() != knots.dim() {
        return Err(dims(format!(
            "data have {} columns, knots have {}",
            x.ncols(),
            knots.dim()
        )));
    }
    let n = x.nrows();
    if knots.points() == x {
        // B = I: the fit is the kriging smoother, whose interpolant through
        // the fitted values is its own predictor
        let fit = kriging_fit(x, y, kernel, g_kind, policy)?;
        return Ok(FittedModel {
            method: Method::Gprr,
            interpolator: InterpolatorKind::Gp,
            knots: knots.clone(),
            expansion: Some(fit.expansion),
            gamma_hat: fit.fitted.as_slice().to_vec(),
            lambda: fit.lambda,
            kernel: Some(kernel.clone()),
            g_kind,
            spline_boundary: None,
            diagnostics: FitDiagnostics::new(fit.gcv, fit.trace, fit.jitter),
        });
    }
    let basis = GpBasis::build(knots, kernel, g_kind)?;
    let sigma = basis.penalty();
    let fixed = policy.fixed_value()?;
    let b = basis.design_matrix(x)?;
    let lambda = match (fixed, policy) {
        (Some(l), _) => l,
        (None, LambdaPolicy::Gcv { grid }) => select_lambda(&b, y, &sigma, grid)?.lambda,
        _ => unreachable!(),
    };
    let gamma = ridge_reconstruct(&b, y, lambda, &sigma)?;
    let (gcv, trace) = match RidgePath::new(&b, y, &sigma)? {
        Some(p) => (p.gcv(lambda), p.trace(lambda)),
        None => {
            let rss = (y - &b * &gamma).norm_squared();
            let t = crate::numerics::hat_trace(&b, &sigma, lambda).unwrap_or(f64::NAN);
            (gcv_from_parts(rss, t, n), t)
        }
    };
    Ok(FittedModel {
        method: Method::Gprr,
        interpolator: InterpolatorKind::Gp,
        knots: knots.clone(),
        expansion: Some(basis.interpolant(&gamma)?),
        gamma_hat: gamma.as_slice().to_vec(),
        lambda,
        kernel: Some(kernel.clone()),
        g_kind,
        spline_boundary: None,
        diagnostics: FitDiagnostics::new(gcv, trace, basis.jitter_applied()),
    })
}
