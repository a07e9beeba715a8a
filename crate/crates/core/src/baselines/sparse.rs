use nalgebra::{DMatrix, DVector};

use super::{knot_values, LowRank, VarianceParams};
use crate::error::Result;
use crate::estimators::{check_data, FitDiagnostics, FittedModel, InterpolatorKind, Method};
use crate::interpolators::{KernelExpansion, KnotSet, RegressionBasis};
use crate::kernels::KernelSpec;
use crate::numerics::SpdFactorization;

/// Minimizes `(y - B gamma)' W (y - B gamma) + ridge * gamma' R_A^{-1} gamma`
/// with `B = R_XA R_A^{-1}` in whitened coordinates `gamma = L beta`.
fn weighted_fit(
    lr: &LowRank,
    y: &DVector<f64>,
    weights: Option<&[f64]>,
    ridge: f64,
) -> Result<(DVector<f64>, f64)> {
    let wf = match weights {
        Some(w) => {
            let mut wf = lr.f.clone();
            for (mut row, wi) in wf.row_iter_mut().zip(w) {
                row *= *wi;
            }
            wf
        }
        None => lr.f.clone(),
    };
    let gram = wf.tr_mul(&lr.f);
    let mut system = gram.clone();
    for i in 0..system.nrows() {
        system[(i, i)] += ridge;
    }
    let f = SpdFactorization::new(&system)?;
    let beta = f.solve_vec(&wf.tr_mul(y))?;
    let trace = f.solve(&gram)?.trace();
    Ok((beta, trace))
}

fn finish(
    method: Method,
    lr: &LowRank,
    beta: &DVector<f64>,
    trace: f64,
    knots: &KnotSet,
    kernel: &KernelSpec,
    lambda: f64,
) -> Result<FittedModel> {
    let w = lr.weights(beta)?;
    let expansion = KernelExpansion::new(
        kernel.clone(),
        RegressionBasis::None,
        knots.points(),
        Vec::new(),
        w.as_slice().to_vec(),
    )?;
    Ok(FittedModel {
        method,
        interpolator: InterpolatorKind::Kernel,
        gamma_hat: knot_values(&expansion, knots),
        expansion: Some(expansion),
        knots: knots.clone(),
        lambda,
        kernel: Some(kernel.clone()),
        g_kind: RegressionBasis::None,
        spline_boundary: None,
        diagnostics: FitDiagnostics {
            gcv: None,
            trace: Some(trace),
            jitter: lr.factor.jitter_applied(),
            iterations: 1,
        },
    })
}

/// Sparse pseudo-input GP: the Nystrom prior plus the diagonal correction
/// `Lambda = diag(R_X - R_XA R_A^{-1} R_XA')` folded into the noise,
/// `W = (tau2 Lambda + sigma2 I)^{-1}`.
pub fn fit_spgp(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
    vp: &VarianceParams,
) -> Result<FittedModel> {
    check_data(x, y)?;
    let vp = VarianceParams::new(vp.tau2, vp.sigma2)?;
    let lr = LowRank::new(x, knots, kernel)?;
    let w: Vec<f64> = lr
        .residual_diagonal()
        .iter()
        .map(|l| 1.0 / (vp.tau2 * l + vp.sigma2))
        .collect();
    let (beta, trace) = weighted_fit(&lr, y, Some(&w), 1.0 / vp.tau2)?;
    finish(Method::Spgp, &lr, &beta, trace, knots, kernel, vp.lambda(x.nrows()))
}

/// Quasi-posterior mode
/// `argmin |y - R_XA R_A^{-1} gamma|^2 + (sigma2 / tau2) gamma' R_A^{-1} gamma`.
pub fn fit_empirical_bayes(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
    vp: &VarianceParams,
) -> Result<FittedModel> {
    check_data(x, y)?;
    let vp = VarianceParams::new(vp.tau2, vp.sigma2)?;
    let lr = LowRank::new(x, knots, kernel)?;
    let (beta, trace) = weighted_fit(&lr, y, None, vp.sigma2 / vp.tau2)?;
    finish(Method::Eb, &lr, &beta, trace, knots, kernel, vp.lambda(x.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_gprr, fit_krr, predict, LambdaPolicy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>());
        let y = DVector::from_fn(n, |i, _| (3.0 * x[(i, 0)]).sin() + x[(i, 1)] + 0.1 * rng.gen::<f64>());
        (x, y)
    }

    #[test]
    fn spgp_at_full_knots_is_krr() {
        let (x, y) = data(30, 1);
        let knots = KnotSet::new(x.clone()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let vp = VarianceParams::new(2.0, 0.05).unwrap();
        let a = fit_spgp(&x, &y, &knots, &k, &vp).unwrap();
        let b = fit_krr(&x, &y, &k, vp.lambda(30)).unwrap();
        let (xt, _) = data(50, 2);
        assert!((predict(&a, &xt).unwrap() - predict(&b, &xt).unwrap()).amax() < 1e-8);
    }

    #[test]
    fn eb_is_gprr_and_spgp_without_correction() {
        let (x, y) = data(40, 3);
        let knots = KnotSet::subset(&x, &(0..12).collect::<Vec<_>>()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let vp = VarianceParams::new(1.5, 0.02).unwrap();
        let eb = fit_empirical_bayes(&x, &y, &knots, &k, &vp).unwrap();
        let policy = LambdaPolicy::Fixed { lambda: vp.lambda(40) };
        let gprr = fit_gprr(&x, &y, &knots, &k, RegressionBasis::None, &policy).unwrap();
        let (xt, _) = data(50, 4);
        assert!((predict(&eb, &xt).unwrap() - predict(&gprr, &xt).unwrap()).amax() < 1e-8);
        let all = KnotSet::new(x.clone()).unwrap();
        let a = fit_empirical_bayes(&x, &y, &all, &k, &vp).unwrap();
        let b = fit_spgp(&x, &y, &all, &k, &vp).unwrap();
        assert!((predict(&a, &xt).unwrap() - predict(&b, &xt).unwrap()).amax() < 1e-8);
    }

    #[test]
    fn shrinkage_grows_as_tau2_falls() {
        let (x, y) = data(50, 5);
        let knots = KnotSet::subset(&x, &(0..8).collect::<Vec<_>>()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let ra = crate::kernels::kernel_matrix_sym(&k, knots.points()).unwrap();
        let ra_inv = ra.try_inverse().unwrap();
        let norms: Vec<f64> = [10.0, 1.0, 0.1, 0.01]
            .iter()
            .map(|&tau2| {
                let m = fit_empirical_bayes(&x, &y, &knots, &k, &VarianceParams::new(tau2, 0.1).unwrap()).unwrap();
                let g = DVector::from_vec(m.gamma_hat);
                g.dot(&(&ra_inv * &g))
            })
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
        let tiny = fit_spgp(&x, &y, &knots, &k, &VarianceParams::new(1e-9, 0.1).unwrap()).unwrap();
        assert!(tiny.gamma_hat.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn zero_response_and_interpolation_limit() {
        let (x, y) = data(20, 6);
        let knots = KnotSet::new(x.clone()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 30.0).unwrap();
        let z = fit_spgp(&x, &DVector::zeros(20), &knots, &k, &VarianceParams::new(1.0, 0.1).unwrap()).unwrap();
        assert!(z.gamma_hat.iter().all(|v| *v == 0.0));
        let m = fit_empirical_bayes(&x, &y, &knots, &k, &VarianceParams::new(1.0, 1e-12).unwrap()).unwrap();
        assert!((predict(&m, &x).unwrap() - &y).amax() < 1e-6);
        assert!(VarianceParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn superposition() {
        let (x, y1) = data(40, 7);
        let y2 = DVector::from_fn(40, |i, _| (i as f64 * 0.3).cos());
        let knots = KnotSet::subset(&x, &(0..10).collect::<Vec<_>>()).unwrap();
        let k = KernelSpec::gaussian_iso(2, 12.5).unwrap();
        let vp = VarianceParams::new(1.0, 0.05).unwrap();
        let (xt, _) = data(15, 8);
        let p = |y: &DVector<f64>| predict(&fit_spgp(&x, y, &knots, &k, &vp).unwrap(), &xt).unwrap();
        assert!((p(&(&y1 + &y2)) - p(&y1) - p(&y2)).amax() < 1e-8);
    }
}
