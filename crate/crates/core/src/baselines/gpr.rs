use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{gls, knot_values, regression_check, LowRank};
use crate::error::{Error, Result};
use crate::estimators::{check_data, kriging_fit, FitDiagnostics, FittedModel, InterpolatorKind, KernelSpectrum, LambdaPolicy, Method};
use crate::interpolators::{KernelExpansion, KnotSet, RegressionBasis};
use crate::kernels::KernelSpec;

/// Universal kriging with nugget `n lambda`:
/// `f(x) = g(x)' beta + r_X(x)' (R_X + n lambda I)^{-1} (y - G beta)` with
/// `beta` by generalized least squares.
pub fn fit_gpr(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: &KernelSpec,
    g_kind: RegressionBasis,
    policy: &LambdaPolicy,
) -> Result<FittedModel> {
    let fit = kriging_fit(x, y, kernel, g_kind, policy)?;
    Ok(FittedModel {
        method: Method::Gpr,
        interpolator: InterpolatorKind::Kernel,
        expansion: Some(fit.expansion),
        knots: KnotSet::new(x.clone())?,
        gamma_hat: fit.fitted.as_slice().to_vec(),
        lambda: fit.lambda,
        kernel: Some(kernel.clone()),
        g_kind,
        spline_boundary: None,
        diagnostics: FitDiagnostics::new(fit.gcv, fit.trace, fit.jitter),
    })
}

/// [`fit_gpr`] with `R_X` replaced by the rank-`m` matrix
/// `R_XA R_A^{-1} R_XA'`; every solve goes through the `m`-dimensional
/// eigenbasis of that matrix, so the cost is O(m^2 n).
pub fn fit_nystrom(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
    g_kind: RegressionBasis,
    policy: &LambdaPolicy,
) -> Result<FittedModel> {
    check_data(x, y)?;
    let n = x.nrows();
    let g = regression_check(g_kind, x)?;
    let lr = LowRank::new(x, knots, kernel)?;
    let eigen = SymmetricEigen::new(lr.f.tr_mul(&lr.f));
    let top = eigen.eigenvalues.max();
    let keep: Vec<usize> = (0..eigen.eigenvalues.len())
        .filter(|&i| eigen.eigenvalues[i] > 1e-12 * top)
        .collect();
    let d: Vec<f64> = keep.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let p = eigen.eigenvectors.select_columns(&keep);
    let mut q = &lr.f * p;
    for (mut col, e) in q.column_iter_mut().zip(&d) {
        col /= e.sqrt();
    }
    let spectrum = KernelSpectrum::from_parts(d.clone(), &q, &g, y);
    let lambda = match (policy.fixed_value()?, policy) {
        (Some(l), _) => l,
        (None, LambdaPolicy::Gcv { grid }) => spectrum.select(grid)?.lambda,
        _ => unreachable!(),
    };
    let s = n as f64 * lambda;
    if s == 0.0 && q.ncols() < n {
        return Err(Error::SingularSystem(
            "the low-rank kernel matrix needs a positive lambda".into(),
        ));
    }
    let kinv = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let mut coef = q.tr_mul(m);
        for (mut row, e) in coef.row_iter_mut().zip(&d) {
            row /= e + s;
        }
        let mut out = &q * coef;
        if s > 0.0 {
            let proj = &q * q.tr_mul(m);
            out += (m - proj) / s;
        }
        Ok(out)
    };
    let (beta, c) = gls(kinv, &g, y)?;
    let w = lr.weights(&lr.f.tr_mul(&c))?;
    let expansion = KernelExpansion::new(
        kernel.clone(),
        g_kind,
        knots.points(),
        beta.as_slice().to_vec(),
        w.as_slice().to_vec(),
    )?;
    Ok(FittedModel {
        method: Method::Nystrom,
        interpolator: InterpolatorKind::Kernel,
        gamma_hat: knot_values(&expansion, knots),
        expansion: Some(expansion),
        knots: knots.clone(),
        lambda,
        kernel: Some(kernel.clone()),
        g_kind,
        spline_boundary: None,
        diagnostics: FitDiagnostics::new(
            spectrum.gcv(lambda),
            spectrum.trace(lambda),
            lr.factor.jitter_applied(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_krr, predict};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, d: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen::<f64>());
        let y = DVector::from_fn(n, |i, _| 1.0 + x[(i, 0)] - (2.0 * x[(i, d - 1)]).cos() + 0.1 * rng.gen::<f64>());
        (x, y)
    }

    #[test]
    fn constant_data_is_absorbed_by_the_trend() {
        let (x, _) = data(30, 2, 1);
        let y = DVector::from_element(30, -1.5);
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        for lambda in [0.0, 1e-3, 1.0] {
            let m = fit_gpr(&x, &y, &k, RegressionBasis::Constant, &LambdaPolicy::Fixed { lambda }).unwrap();
            let (xt, _) = data(20, 2, 2);
            assert!(predict(&m, &xt).unwrap().iter().all(|v| (v + 1.5).abs() < 1e-8));
        }
    }

    #[test]
    fn interpolates_and_matches_krr() {
        let (x, y) = data(30, 2, 3);
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let m = fit_gpr(&x, &y, &k, RegressionBasis::Linear, &LambdaPolicy::None).unwrap();
        assert!((predict(&m, &x).unwrap() - &y).amax() < 1e-8);
        let (xt, _) = data(50, 2, 4);
        let a = fit_gpr(&x, &y, &k, RegressionBasis::None, &LambdaPolicy::Fixed { lambda: 1e-3 }).unwrap();
        let b = fit_krr(&x, &y, &k, 1e-3).unwrap();
        assert!((predict(&a, &xt).unwrap() - predict(&b, &xt).unwrap()).amax() < 1e-8);
    }

    #[test]
    fn nystrom_at_full_rank_is_gpr() {
        let (x, y) = data(30, 2, 5);
        let knots = KnotSet::new(x.clone()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let (xt, _) = data(50, 2, 6);
        for policy in [LambdaPolicy::Fixed { lambda: 1e-3 }, LambdaPolicy::gcv_default()] {
            let a = fit_nystrom(&x, &y, &knots, &k, RegressionBasis::Linear, &policy).unwrap();
            let b = fit_gpr(&x, &y, &k, RegressionBasis::Linear, &policy).unwrap();
            assert_eq!(a.lambda, b.lambda);
            assert!((predict(&a, &xt).unwrap() - predict(&b, &xt).unwrap()).amax() < 1e-8);
        }
    }

    #[test]
    fn rank_one_nystrom() {
        let (x, y) = data(40, 1, 7);
        let knots = KnotSet::from_1d(&[0.4]).unwrap();
        let k = KernelSpec::gaussian_iso(1, 12.5).unwrap();
        let m = fit_nystrom(&x, &y, &knots, &k, RegressionBasis::Linear, &LambdaPolicy::Fixed { lambda: 0.01 }).unwrap();
        let e = m.expansion.as_ref().unwrap();
        assert_eq!(e.weights().len(), 1);
        let b = e.beta();
        for t in [0.0, 0.3, 0.9] {
            let v = predict(&m, &DMatrix::from_element(1, 1, t)).unwrap()[0];
            let expect = b[0] + b[1] * t + e.weights()[0] * k.value(&[t - 0.4]).unwrap();
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn nystrom_gcv_matches_dense_smoother() {
        let (x, y) = data(60, 2, 8);
        let knots = KnotSet::subset(&x, &(0..10).collect::<Vec<_>>()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let lambda = 1e-3;
        let m = fit_nystrom(&x, &y, &knots, &k, RegressionBasis::Linear, &LambdaPolicy::Fixed { lambda }).unwrap();
        let fitted = predict(&m, &x).unwrap();
        // dense oracle for the same smoother
        let rxa = crate::kernels::kernel_matrix(&k, &x, knots.points()).unwrap();
        let ra = crate::kernels::kernel_matrix_sym(&k, knots.points()).unwrap();
        let rt = &rxa * ra.try_inverse().unwrap() * rxa.transpose();
        let kk = (&rt + DMatrix::identity(60, 60) * (60.0 * lambda)).try_inverse().unwrap();
        let g = RegressionBasis::Linear.matrix(&x);
        let beta = (g.transpose() * &kk * &g).try_inverse().unwrap() * g.transpose() * &kk * &y;
        let dense = &g * &beta + &rt * &kk * (&y - &g * &beta);
        assert!((fitted - dense).amax() < 1e-7);
    }

    #[test]
    fn nystrom_never_forms_n_by_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>());
        let y = DVector::from_fn(n, |i, _| x[(i, 0)].sin());
        let knots = crate::designs::select_knots(&x, 40, 50, 1).unwrap().knots;
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let m = fit_nystrom(&x, &y, &knots, &k, RegressionBasis::Linear, &LambdaPolicy::Fixed { lambda: 1e-6 }).unwrap();
        assert_eq!(m.gamma_hat.len(), 40);
    }
}
