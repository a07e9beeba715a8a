//! Full-data penalized spline fit on a large 1-d sample in row order.

use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use reconstruct::estimators::{fit_fdp, log_grid, LambdaPolicy};
use reconstruct::interpolators::SplineBoundary;
use reconstruct::numerics::TracePolicy;

fn main() -> reconstruct::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let policy = LambdaPolicy::Gcv { grid: log_grid(1e-2, 1e12, 29) };
    for n in [1_000usize, 100_000, 1_000_000] {
        let y = DVector::from_fn(n, |i, _| {
            let x = i as f64 / (n - 1) as f64;
            (6.0 * x).sin() + 0.3 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        let t = Instant::now();
        let fit = fit_fdp(&y, &policy, TracePolicy::Exact, SplineBoundary::NotAKnot)?;
        let err = (0..=100)
            .map(|k| {
                let x = k as f64 / 100.0;
                (fit.eval(x) - (6.0 * x).sin()).abs()
            })
            .fold(0.0, f64::max);
        println!(
            "n={n:>8}  lambda {:.3e}  edf {:.2}  max error {:.4}  ({:.2?})",
            fit.lambda,
            fit.trace.value,
            err,
            t.elapsed()
        );
    }
    Ok(())
}
