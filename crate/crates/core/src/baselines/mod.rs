//! Comparators: full GPR with regression terms, the Nystrom low-rank method,
//! SPGP with its diagonal correction, and the empirical-Bayes estimator.
//! All return the same [`FittedModel`](crate::estimators::FittedModel) form.

mod gpr;
mod sparse;
mod variances;

pub use gpr::{fit_gpr, fit_nystrom};
pub use sparse::{fit_empirical_bayes, fit_spgp};
pub use variances::{estimate_variances, marginal_log_likelihood, VARIANCE_GRID_POINTS};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};
pub(crate) use crate::estimators::{gls, regression_check};
use crate::interpolators::{KernelExpansion, KnotSet};
use crate::kernels::{correlation_matrix_factored, kernel_matrix, KernelSpec};
use crate::numerics::SpdFactorization;

/// Prior scale `tau2` of `f ~ GP(0, tau2 R)` and noise variance `sigma2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceParams {
    pub tau2: f64,
    pub sigma2: f64,
}

impl VarianceParams {
    pub fn new(tau2: f64, sigma2: f64) -> Result<Self> {
        if !(tau2 > 0.0 && sigma2 > 0.0) || !tau2.is_finite() || !sigma2.is_finite() {
            return Err(invalid("variances must be positive and finite"));
        }
        Ok(Self { tau2, sigma2 })
    }

    /// The penalty weight `sigma2 / (n tau2)` these variances correspond to.
    pub fn lambda(&self, n: usize) -> f64 {
        self.sigma2 / (n as f64 * self.tau2)
    }
}

/// `R_A = L L'`, `R_XA`, and the whitened cross-correlation `F = R_XA L^{-T}`,
/// so that the Nystrom matrix is `F F'`.
pub(crate) struct LowRank {
    pub factor: SpdFactorization,
    pub f: DMatrix<f64>,
}

impl LowRank {
    pub(crate) fn new(x: &DMatrix<f64>, knots: &KnotSet, kernel: &KernelSpec) -> Result<Self> {
        if x.ncols() != knots.dim() {
            return Err(dims(format!(
                "data have {} columns, knots have {}",
                x.ncols(),
                knots.dim()
            )));
        }
        let factor = correlation_matrix_factored(kernel, knots)?;
        let rxa = kernel_matrix(kernel, x, knots.points())?;
        let f = factor.solve_lower(&rxa.transpose())?.transpose();
        Ok(Self { factor, f })
    }

    /// `diag(R_X - F F')` clamped at zero (unit kernel diagonal).
    pub(crate) fn residual_diagonal(&self) -> Vec<f64> {
        self.f
            .row_iter()
            .map(|r| (1.0 - r.norm_squared()).max(0.0))
            .collect()
    }

    /// Knot-space weights `w = L^{-T} beta` for whitened coefficients `beta`.
    pub(crate) fn weights(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        let l = self.factor.factor();
        l.transpose()
            .solve_upper_triangular(beta)
            .ok_or_else(|| Error::SingularSystem("singular knot factor".into()))
    }
}

/// Fitted values at the knots of `g(x)' beta + r_A(x)' w`.
pub(crate) fn knot_values(expansion: &KernelExpansion, knots: &KnotSet) -> Vec<f64> {
    let d = knots.dim();
    let rm = crate::kernels::row_major(knots.points());
    rm.chunks(d).map(|p| expansion.eval_unchecked(p)).collect()
}
