//! Reconstruction with a GP interpolator on a small knot set, compared with
//! full kernel ridge regression.

use std::time::Instant;

use reconstruct::benchmarks::{evaluate, simulate, TestFunction};
use reconstruct::designs::select_knots;
use reconstruct::estimators::{estimate_kernel_params, fit_gprr, fit_krr_gcv, default_lambda_grid, KernelParamOptions, LambdaPolicy};
use reconstruct::interpolators::RegressionBasis;
use reconstruct::kernels::KernelSpec;

fn main() -> reconstruct::Result<()> {
    let train = simulate(TestFunction::III, 2, 1000, 0.5, 1)?;
    let test = simulate(TestFunction::III, 2, 2000, 0.0, 2)?;
    let kernel = KernelSpec::gaussian_iso(2, 12.5)?;

    let t = Instant::now();
    let krr = fit_krr_gcv(&train.x, &train.y, &kernel, &default_lambda_grid())?;
    println!("krr        n=1000   MSE {:.4}  ({:.2?})", evaluate(&krr, &test.x, &test.y)?, t.elapsed());

    for m in [20, 40, 80] {
        let t = Instant::now();
        let sel = select_knots(&train.x, m, 2000, 1)?;
        let policy = LambdaPolicy::auto(m, train.len());
        let model = fit_gprr(&train.x, &train.y, &sel.knots, &kernel, RegressionBasis::Linear, &policy)?;
        println!(
            "gprr       m={m:<5}  MSE {:.4}  lambda {:.1e}  ({:.2?})",
            evaluate(&model, &test.x, &test.y)?,
            model.lambda,
            t.elapsed()
        );
    }

    let sel = select_knots(&train.x, 40, 2000, 1)?;
    // least squares over (gamma, theta) from a smooth start
    let est = estimate_kernel_params(&train.x, &train.y, &sel.knots, RegressionBasis::Linear, &[0.1, 0.1], &KernelParamOptions::default())?;
    let tuned = KernelSpec::gaussian(est.theta.clone())?;
    let model = fit_gprr(&train.x, &train.y, &sel.knots, &tuned, RegressionBasis::Linear, &LambdaPolicy::None)?;
    println!("gprr tuned m=40     MSE {:.4}  theta {:?}", evaluate(&model, &test.x, &test.y)?, est.theta);
    Ok(())
}
