use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sample size for the sup-norm estimate when `d > 2`.
pub const MONTE_CARLO_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationError {
    /// `max |interp(x) - truth(x)|` over the evaluation set.
    pub sup: f64,
    pub points: usize,
    /// Seed of the Monte Carlo sample; `None` for a tensor grid.
    pub seed: Option<u64>,
}

/// Sup-norm distance between an interpolant and the truth on `[0, 1]^d`.
///
/// For `d <= 2` the maximum is taken over a tensor grid with `grid_size`
/// points per axis; otherwise over `MONTE_CARLO_POINTS` uniform points drawn
/// from `seed`.
pub fn interpolation_error<I, T>(
    interp: I,
    truth: T,
    d: usize,
    grid_size: usize,
    seed: u64,
) -> Result<InterpolationError>
where
    I: Fn(&[f64]) -> f64,
    T: Fn(&[f64]) -> f64,
{
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut sup: f64 = 0.0;
    let mut x = vec![0.0; d];
    if d <= 2 {
        if grid_size < 2 {
            return Err(invalid("grid needs at least two points per axis"));
        }
        let step = 1.0 / (grid_size - 1) as f64;
        let total = grid_size.pow(d as u32);
        for k in 0..total {
            let mut r = k;
            for xi in x.iter_mut() {
                *xi = (r % grid_size) as f64 * step;
                r /= grid_size;
            }
            sup = sup.max((interp(&x) - truth(&x)).abs());
        }
        return Ok(InterpolationError {
            sup,
            points: total,
            seed: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MONTE_CARLO_POINTS {
        for xi in x.iter_mut() {
            *xi = rng.gen::<f64>();
        }
        sup = sup.max((interp(&x) - truth(&x)).abs());
    }
    Ok(InterpolationError {
        sup,
        points: MONTE_CARLO_POINTS,
        seed: Some(seed),
    })
}
