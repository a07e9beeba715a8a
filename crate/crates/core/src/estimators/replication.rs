use nalgebra::DVector;

use super::{FitDiagnostics, FittedModel, InterpolatorKind, Method};
use crate::designs::ReplicationDesign;
use crate::error::{invalid, Error, Result};
use crate::interpolators::{KnotSet, RegressionBasis, SplineBoundary};

/// Per-knot means of a replication design, rebuilt by polynomial or spline
/// interpolation.
pub fn fit_replication(
    design: &ReplicationDesign,
    y: &DVector<f64>,
    kind: InterpolatorKind,
    boundary: SplineBoundary,
) -> Result<FittedModel> {
    if y.len() != design.len() {
        return Err(Error::LengthMismatch {
            expected: design.len(),
            got: y.len(),
        });
    }
    let l = design.replications_per_knot;
    let gamma_hat: Vec<f64> = y
        .as_slice()
        .chunks(l)
        .map(|c| c.iter().sum::<f64>() / l as f64)
        .collect();
    let spline_boundary = match kind {
        InterpolatorKind::Lagrange => None,
        InterpolatorKind::Spline => {
            if design.knots.len() < 2 {
                return Err(invalid("spline reconstruction needs two knots"));
            }
            if design.knots.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::UnsortedKnots);
            }
            Some(boundary)
        }
        _ => return Err(invalid("replication designs use Lagrange or spline reconstruction")),
    };
    Ok(FittedModel {
        method: Method::Replication,
        interpolator: kind,
        knots: KnotSet::from_1d(&design.knots)?,
        gamma_hat,
        lambda: 0.0,
        kernel: None,
        g_kind: RegressionBasis::None,
        spline_boundary,
        expansion: None,
        diagnostics: FitDiagnostics {
            iterations: 1,
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{chebyshev_knots, replication_design};
    use crate::estimators::predict;
    use nalgebra::DMatrix;

    #[test]
    fn averages_replicates() {
        let d = replication_design(&[0.2, 0.8], 2).unwrap();
        let m = fit_replication(&d, &DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]), InterpolatorKind::Spline, SplineBoundary::NotAKnot).unwrap();
        assert_eq!(m.gamma_hat, vec![2.0, 6.0]);
        let single = replication_design(&[0.1, 0.4, 0.9], 1).unwrap();
        let y = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let m = fit_replication(&single, &y, InterpolatorKind::Lagrange, SplineBoundary::NotAKnot).unwrap();
        assert_eq!(m.gamma_hat, y.as_slice());
    }

    #[test]
    fn noiseless_replicates_recover_values() {
        let knots = chebyshev_knots(7).unwrap();
        let d = replication_design(&knots, 7).unwrap();
        let f = |x: f64| (2.0 * x).exp();
        let y = DVector::from_iterator(49, d.points().into_iter().map(f));
        let m = fit_replication(&d, &y, InterpolatorKind::Lagrange, SplineBoundary::NotAKnot).unwrap();
        for (g, a) in m.gamma_hat.iter().zip(&knots) {
            assert!((g - f(*a)).abs() < 1e-14 * f(*a));
        }
        let p = predict(&m, &DMatrix::from_column_slice(7, 1, &knots)).unwrap();
        for (a, b) in p.iter().zip(&m.gamma_hat) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn length_mismatch() {
        let d = replication_design(&[0.2, 0.8], 3).unwrap();
        assert!(matches!(
            fit_replication(&d, &DVector::zeros(5), InterpolatorKind::Spline, SplineBoundary::NotAKnot),
            Err(Error::LengthMismatch { expected: 6, got: 5 })
        ));
    }
}
