//! GPRR against GPR, Nystrom, SPGP and empirical Bayes on the same knots.

use reconstruct::baselines::{estimate_variances, fit_empirical_bayes, fit_gpr, fit_nystrom, fit_spgp};
use reconstruct::benchmarks::{evaluate, simulate, TestFunction};
use reconstruct::designs::select_knots;
use reconstruct::estimators::{fit_gprr, FittedModel, LambdaPolicy};
use reconstruct::interpolators::RegressionBasis;
use reconstruct::kernels::KernelSpec;

fn main() -> reconstruct::Result<()> {
    let train = simulate(TestFunction::I, 2, 600, 1.0, 11)?;
    let test = simulate(TestFunction::I, 2, 2000, 0.0, 12)?;
    let kernel = KernelSpec::gaussian_iso(2, 12.5)?;
    let knots = select_knots(&train.x, 30, 2000, 11)?.knots;
    let g = RegressionBasis::Linear;
    let gcv = LambdaPolicy::gcv_default();

    let vp = estimate_variances(&train.x, &train.y, &knots, &kernel)?;
    println!("estimated tau2 {:.3}  sigma2 {:.3}", vp.tau2, vp.sigma2);

    let fits: Vec<(&str, FittedModel)> = vec![
        ("gpr", fit_gpr(&train.x, &train.y, &kernel, g, &gcv)?),
        ("gprr", fit_gprr(&train.x, &train.y, &knots, &kernel, g, &LambdaPolicy::auto(30, 600))?),
        ("nystrom", fit_nystrom(&train.x, &train.y, &knots, &kernel, g, &gcv)?),
        ("spgp", fit_spgp(&train.x, &train.y, &knots, &kernel, &vp)?),
        ("eb", fit_empirical_bayes(&train.x, &train.y, &knots, &kernel, &vp)?),
    ];
    for (name, model) in &fits {
        println!("{name:>8}  MSE {:.4}", evaluate(model, &test.x, &test.y)?);
    }
    Ok(())
}
