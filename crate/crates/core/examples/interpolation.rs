//! Lagrange, cubic spline and GP interpolation of a smooth 1-d function.

use nalgebra::DVector;
use reconstruct::designs::{chebyshev_knots, equispaced_knots};
use reconstruct::interpolators::{
    fit_cubic_spline, gp_basis_build, interpolation_error, KnotSet, LagrangeInterpolator, RegressionBasis,
    SplineBoundary,
};
use reconstruct::kernels::KernelSpec;

fn truth(x: f64) -> f64 {
    (6.0 * x).sin() + 0.5 * x
}

fn main() -> reconstruct::Result<()> {
    println!("   m   lagrange     spline         gp");
    for m in [5, 9, 13, 17] {
        let cheb = chebyshev_knots(m)?;
        let gamma: Vec<f64> = cheb.iter().map(|&a| truth(a)).collect();
        let lagrange = LagrangeInterpolator::new(&cheb)?;
        let e_lag = interpolation_error(|x| lagrange.eval(&gamma, x[0]).unwrap(), |x| truth(x[0]), 1, 2001, 0)?;

        let eq = equispaced_knots(m)?;
        let gamma_eq: Vec<f64> = eq.iter().map(|&a| truth(a)).collect();
        let spline = fit_cubic_spline(&eq, &gamma_eq, SplineBoundary::NotAKnot)?;
        let e_spl = interpolation_error(|x| spline.eval(x[0]), |x| truth(x[0]), 1, 2001, 0)?;

        let basis = gp_basis_build(&KnotSet::from_1d(&eq)?, &KernelSpec::gaussian(vec![12.5])?, RegressionBasis::Linear)?;
        let gp = basis.interpolant(&DVector::from_vec(gamma_eq))?;
        let e_gp = interpolation_error(|x| gp.eval(x).unwrap(), |x| truth(x[0]), 1, 2001, 0)?;

        println!("{m:>4} {:>10.3e} {:>10.3e} {:>10.3e}", e_lag.sup, e_spl.sup, e_gp.sup);
    }
    Ok(())
}
