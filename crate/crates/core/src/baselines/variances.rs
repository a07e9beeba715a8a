use nalgebra::{DMatrix, DVector};

use super::{LowRank, VarianceParams};
use crate::error::{Error, Result};
use crate::estimators::{check_data, log_grid};
use crate::interpolators::KnotSet;
use crate::kernels::KernelSpec;
use crate::numerics::SpdFactorization;

/// Points per axis of the `(tau2, sigma2)` search grid.
pub const VARIANCE_GRID_POINTS: usize = 20;

fn log_likelihood(lr: &LowRank, resid: &[f64], y: &DVector<f64>, vp: &VarianceParams) -> Result<f64> {
    let n = y.len();
    let d: Vec<f64> = resid.iter().map(|l| vp.tau2 * l + vp.sigma2).collect();
    let mut fd = lr.f.clone();
    for (mut row, di) in fd.row_iter_mut().zip(&d) {
        row /= *di;
    }
    let mut m = fd.tr_mul(&lr.f) * vp.tau2;
    for i in 0..m.nrows() {
        m[(i, i)] += 1.0;
    }
    let mf = SpdFactorization::new(&m)?;
    let b = fd.tr_mul(y);
    let quad = y.iter().zip(&d).map(|(v, di)| v * v / di).sum::<f64>()
        - vp.tau2 * b.dot(&mf.solve_vec(&b)?);
    let logdet = d.iter().map(|v| v.ln()).sum::<f64>() + mf.ln_determinant();
    Ok(-0.5 * (quad + logdet + n as f64 * (2.0 * std::f64::consts::PI).ln()))
}

/// Log marginal likelihood of `y` under `f ~ GP(0, tau2 R)` with the
/// low-rank-plus-diagonal covariance `tau2 (Q + diag(R - Q)) + sigma2 I`,
/// `Q = R_XA R_A^{-1} R_XA'`. Never forms an `n x n` matrix.
pub fn marginal_log_likelihood(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
    vp: &VarianceParams,
) -> Result<f64> {
    check_data(x, y)?;
    let lr = LowRank::new(x, knots, kernel)?;
    log_likelihood(&lr, &lr.residual_diagonal(), y, vp)
}

/// Coordinate search for the maximizer of [`marginal_log_likelihood`] on a
/// log-spaced grid spanning `[1e-4, 1e4] * var(y)` in both variances:
/// alternately the best `sigma2` for the current `tau2` and vice versa, until
/// neither moves.
pub fn estimate_variances(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    kernel: &KernelSpec,
) -> Result<VarianceParams> {
    check_data(x, y)?;
    let n = y.len() as f64;
    let mean = y.sum() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::DegenerateData("response has zero variance".into()));
    }
    let lr = LowRank::new(x, knots, kernel)?;
    let resid = lr.residual_diagonal();
    let grid = log_grid(1e-4 * var, 1e4 * var, VARIANCE_GRID_POINTS);
    let mut cache = vec![None; grid.len() * grid.len()];
    let mut score = |t: usize, s: usize| -> f64 {
        *cache[t * grid.len() + s].get_or_insert_with(|| {
            let vp = VarianceParams {
                tau2: grid[t],
                sigma2: grid[s],
            };
            log_likelihood(&lr, &resid, y, &vp)
                .ok()
                .filter(|v| v.is_finite())
                .unwrap_or(f64::NEG_INFINITY)
        })
    };
    let (mut t, mut s) = (VARIANCE_GRID_POINTS / 2, VARIANCE_GRID_POINTS / 3);
    let mut best = score(t, s);
    loop {
        let before = (t, s);
        for j in 0..grid.len() {
            let v = score(t, j);
            if v > best {
                best = v;
                s = j;
            }
        }
        for i in 0..grid.len() {
            let v = score(i, s);
            if v > best {
                best = v;
                t = i;
            }
        }
        if (t, s) == before {
            break;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::SingularSystem("likelihood undefined on the variance grid".into()));
    }
    VarianceParams::new(grid[t], grid[s])
}
