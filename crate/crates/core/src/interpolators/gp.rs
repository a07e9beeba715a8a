use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::KnotSet;
use crate::error::{dims, invalid, Error, Result};
use crate::kernels::{correlation_matrix_factored, correlation_vector, kernel_matrix, row_major, KernelSpec};
use crate::numerics::SpdFactorization;

/// Regression functions `g(x)` of the universal-kriging interpolator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionBasis {
    #[default]
    None,
    Constant,
    /// `(1, x_1, ..., x_d)`.
    Linear,
}

impl RegressionBasis {
    pub fn len(self, d: usize) -> usize {
        match self {
            RegressionBasis::None => 0,
            RegressionBasis::Constant => 1,
            RegressionBasis::Linear => 1 + d,
        }
    }

    pub fn row(self, x: &[f64], out: &mut [f64]) {
        match self {
            RegressionBasis::None => {}
            RegressionBasis::Constant => out[0] = 1.0,
            RegressionBasis::Linear => {
                out[0] = 1.0;
                out[1..].copy_from_slice(x);
            }
        }
    }

    /// `n x q` matrix with rows `g(x_i)'`.
    pub fn matrix(self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, d) = x.shape();
        let q = self.len(d);
        let mut g = DMatrix::zeros(n, q);
        if q > 0 {
            g.column_mut(0).fill(1.0);
        }
        if self == RegressionBasis::Linear {
            g.columns_mut(1, d).copy_from(x);
        }
        g
    }
}

/// Kriging interpolator written as a linear map of the knot values:
/// `I(x; A, gamma) = b(x)' gamma` with `b(x) = U g(x) + V r_A(x)`.
#[derive(Clone, Debug)]
pub struct GpBasis {
    knots: KnotSet,
    kernel: KernelSpec,
    regression: RegressionBasis,
    knots_rm: Vec<f64>,
    factor: SpdFactorization,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

pub fn gp_basis_build(
    knots: &KnotSet,
    kernel: &KernelSpec,
    regression: RegressionBasis,
) -> Result<GpBasis> {
    GpBasis::build(knots, kernel, regression)
}

impl GpBasis {
    pub fn build(knots: &KnotSet, kernel: &KernelSpec, regression: RegressionBasis) -> Result<Self> {
        let (m, d) = (knots.len(), knots.dim());
        let q = regression.len(d);
        if q > 0 && m <= q {
            return Err(invalid(format!(
                "{m} knots cannot carry {q} regression functions"
            )));
        }
        let factor = correlation_matrix_factored(kernel, knots)?;
        let r_inv = factor.inverse();
        let (u, v) = if q == 0 {
            (DMatrix::zeros(m, 0), r_inv)
        } else {
            let g = regression.matrix(knots.points());
            let sv = g.singular_values();
            let (lo, hi) = (sv.min(), sv.max());
            if !(lo > 1e-10 * hi) {
                return Err(Error::RankDeficientRegression);
            }
            let rig = &r_inv * &g;
            let c = g.transpose() * &rig;
            let cf = SpdFactorization::new(&c).map_err(|_| Error::RankDeficientRegression)?;
            let u = cf.solve(&rig.transpose())?.transpose();
            let mut v = r_inv - &u * rig.transpose();
            crate::numerics::symmetrize(&mut v);
            (u, v)
        };
        Ok(Self {
            knots_rm: row_major(knots.points()),
            knots: knots.clone(),
            kernel: kernel.clone(),
            regression,
            factor,
            u,
            v,
        })
    }

    pub fn knots(&self) -> &KnotSet {
        &self.knots
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn regression(&self) -> RegressionBasis {
        self.regression
    }

    pub fn factor(&self) -> &SpdFactorization {
        &self.factor
    }

    pub fn jitter_applied(&self) -> f64 {
        self.factor.jitter_applied()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Roughness penalty `V R_A V'`, which reduces to `V`.
    pub fn penalty(&self) -> DMatrix<f64> {
        self.v.clone()
    }

    /// `b(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<DVector<f64>> {
        let d = self.knots.dim();
        if x.len() != d {
            return Err(dims(format!("point has {} coordinates, knots have {d}", x.len())));
        }
        let m = self.knots.len();
        let mut r = vec![0.0; m];
        correlation_vector(&self.kernel, &self.knots_rm, d, x, &mut r);
        let mut g = vec![0.0; self.u.ncols()];
        self.regression.row(x, &mut g);
        Ok(&self.u * DVector::from_vec(g) + &self.v * DVector::from_vec(r))
    }

    /// `B` with rows `b(x_i)'`: `G_X U' + R_XA V`.
    pub fn design_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.knots.dim() {
            return Err(dims(format!(
                "data have {} columns, knots have {}",
                x.ncols(),
                self.knots.dim()
            )));
        }
        let r = kernel_matrix(&self.kernel, x, self.knots.points())?;
        let mut b = r * &self.v;
        if self.u.ncols() > 0 {
            b += self.regression.matrix(x) * self.u.transpose();
        }
        Ok(b)
    }

    /// Coefficients `(U' gamma, V gamma)` of the interpolant in the
    /// `g(x)' beta + r_A(x)' w` form.
    pub fn coefficients(&self, gamma: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if gamma.len() != self.knots.len() {
            return Err(dims(format!(
                "{} values for {} knots",
                gamma.len(),
                self.knots.len()
            )));
        }
        Ok((self.u.tr_mul(gamma), &self.v * gamma))
    }

    pub fn interpolant(&self, gamma: &DVector<f64>) -> Result<KernelExpansion> {
        let (beta, w) = self.coefficients(gamma)?;
        KernelExpansion::new(
            self.kernel.clone(),
            self.regression,
            self.knots.points(),
            beta.as_slice().to_vec(),
            w.as_slice().to_vec(),
        )
    }
}

/// Evaluates the kriging interpolant through `(knots, gamma)` at `x`.
pub fn kernel_interp_eval(
    knots: &KnotSet,
    gamma: &[f64],
    kernel: &KernelSpec,
    regression: RegressionBasis,
    x: &[f64],
) -> Result<f64> {
    let basis = GpBasis::build(knots, kernel, regression)?;
    let b = basis.eval(x)?;
    if gamma.len() != b.len() {
        return Err(dims(format!("{} values for {} knots", gamma.len(), b.len())));
    }
    Ok(b.iter().zip(gamma).map(|(a, g)| a * g).sum())
}

/// `f(x) = g(x)' beta + sum_j w_j R(x - c_j)`: the stored form of every
/// kernel-based predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionRepr", into = "ExpansionRepr")]
pub struct KernelExpansion {
    kernel: KernelSpec,
    regression: RegressionBasis,
    d: usize,
    centers_rm: Vec<f64>,
    beta: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ExpansionRepr {
    kernel: KernelSpec,
    regression: RegressionBasis,
    centers: Vec<Vec<f64>>,
    beta: Vec<f64>,
    weights: Vec<f64>,
}

impl KernelExpansion {
    pub fn new(
        kernel: KernelSpec,
        regression: RegressionBasis,
        centers: &DMatrix<f64>,
        beta: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        kernel.validate()?;
        let (m, d) = centers.shape();
        if d == 0 || m == 0 {
            return Err(invalid("an expansion needs at least one center"));
        }
        if let Some(k) = kernel.dim() {
            if k != d {
                return Err(dims(format!("kernel has {k} coordinates, centers have {d}")));
            }
        }
        if weights.len() != m {
            return Err(dims(format!("{} weights for {m} centers", weights.len())));
        }
        if beta.len() != regression.len(d) {
            return Err(dims(format!(
                "{} regression coefficients, expected {}",
                beta.len(),
                regression.len(d)
            )));
        }
        Ok(Self {
            kernel,
            regression,
            d,
            centers_rm: row_major(centers),
            beta,
            weights,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn regression(&self) -> RegressionBasis {
        self.regression
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_centers(&self) -> usize {
        self.weights.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.num_centers(), self.d, &self.centers_rm)
    }

    /// Caller guarantees `x.len() == self.dim()`.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut g = [0.0; 64];
        let q = self.beta.len();
        let trend: f64 = if q <= g.len() {
            self.regression.row(x, &mut g[..q]);
            g[..q].iter().zip(&self.beta).map(|(a, b)| a * b).sum()
        } else {
            let mut gv = vec![0.0; q];
            self.regression.row(x, &mut gv);
            gv.iter().zip(&self.beta).map(|(a, b)| a * b).sum()
        };
        let kern: f64 = self
            .centers_rm
            .chunks_exact(self.d)
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.between(x, c))
            .sum();
        trend + kern
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(dims(format!("point has {} coordinates, expected {}", x.len(), self.d)));
        }
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_many(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x.ncols() != self.d {
            return Err(dims(format!("points have {} columns, expected {}", x.ncols(), self.d)));
        }
        let rm = row_major(x);
        Ok(DVector::from_iterator(
            x.nrows(),
            rm.chunks_exact(self.d.max(1)).map(|p| self.eval_unchecked(p)),
        ))
    }
}

impl TryFrom<ExpansionRepr> for KernelExpansion {
    type Error = Error;

    fn try_from(r: ExpansionRepr) -> Result<Self> {
        let m = r.centers.len();
        let d = r.centers.first().map_or(0, Vec::len);
        if r.centers.iter().any(|c| c.len() != d) {
            return Err(dims("center rows have unequal lengths"));
        }
        let flat: Vec<f64> = r.centers.into_iter().flatten().collect();
        Self::new(
            r.kernel,
            r.regression,
            &DMatrix::from_row_slice(m, d, &flat),
            r.beta,
            r.weights,
        )
    }
}

impl From<KernelExpansion> for ExpansionRepr {
    fn from(e: KernelExpansion) -> Self {
        ExpansionRepr {
            centers: e.centers_rm.chunks_exact(e.d).map(<[f64]>::to_vec).collect(),
            kernel: e.kernel,
            regression: e.regression,
            beta: e.beta,
            weights: e.weights,
        }
    }
}
