use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use reconstruct::designs::{equispaced_knots, knot_criterion};
use reconstruct::estimators::{fit_fdp, gcv, ridge_reconstruct, LambdaPolicy};
use reconstruct::interpolators::{fit_cubic_spline, KnotSet, SplineBoundary};
use reconstruct::numerics::TracePolicy;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ridge_solution_zeroes_the_gradient(b in matrix(25, 4), y in prop::collection::vec(-2.0..2.0f64, 25), lambda in 1e-4..1.0f64) {
        let y = DVector::from_vec(y);
        let sigma = DMatrix::identity(4, 4);
        let gamma = ridge_reconstruct(&b, &y, lambda, &sigma).unwrap();
        let n = 25.0;
        let grad = (b.transpose() * (&b * &gamma - &y)) * (2.0 / n) + &gamma * (2.0 * lambda);
        prop_assert!(grad.norm() < 1e-9);
    }

    #[test]
    fn gcv_scales_with_the_response(b in matrix(30, 3), y in prop::collection::vec(-2.0..2.0f64, 30), c in 0.1..10.0f64) {
        let y = DVector::from_vec(y);
        let sigma = DMatrix::identity(3, 3);
        let a = gcv(&b, &y, 0.01, &sigma).unwrap();
        let scaled = gcv(&b, &(&y * c), 0.01, &sigma).unwrap();
        prop_assert!((scaled - c * c * a).abs() <= 1e-9 * scaled.abs().max(1.0));
    }

    #[test]
    fn splines_reproduce_cubics(m in 4usize..30, c in prop::array::uniform4(-3.0..3.0f64)) {
        let knots = equispaced_knots(m).unwrap();
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let gamma: Vec<f64> = knots.iter().map(|&a| f(a)).collect();
        let s = fit_cubic_spline(&knots, &gamma, SplineBoundary::NotAKnot).unwrap();
        for k in 0..=50 {
            let x = k as f64 / 50.0;
            prop_assert!((s.eval(x) - f(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn fdp_passes_lines_through(n in 3usize..300, a in -5.0..5.0f64, b in -5.0..5.0f64, lambda in 0.0..1e6f64) {
        let y = DVector::from_fn(n, |i, _| a + b * i as f64 / n as f64);
        let fit = fit_fdp(&y, &LambdaPolicy::Fixed { lambda }, TracePolicy::Exact, SplineBoundary::NotAKnot).unwrap();
        for i in 0..n {
            prop_assert!((fit.gamma_hat[i] - y[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn knot_criterion_ignores_order(points in matrix(8, 2), shift in 1usize..8) {
        let points = points.map(|v| (v + 1.0) / 2.0);
        let rotated = DMatrix::from_fn(8, 2, |i, j| points[((i + shift) % 8, j)]);
        let a = knot_criterion(&KnotSet::new(points).unwrap()).unwrap();
        let b = knot_criterion(&KnotSet::new(rotated).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}
