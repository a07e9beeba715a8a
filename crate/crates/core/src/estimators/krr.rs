use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    check_data, gcv_from_dof, pick, FitDiagnostics, FittedModel, GcvPoint, InterpolatorKind,
    LambdaPolicy, LambdaSelection, Method,
};
use crate::error::{invalid, Error, Result};
use crate::interpolators::{KernelExpansion, KnotSet, RegressionBasis};
use crate::kernels::{kernel_matrix_sym, KernelSpec};
use crate::numerics::SpdFactorization;

/// Kernel ridge regression `f(x) = r_X(x)' (R_X + n lambda I)^{-1} y`, stored
/// with `gamma_hat` = fitted values at the data.
pub fn fit_krr(x: &DMatrix<f64>, y: &DVector<f64>, kernel: &KernelSpec, lambda: f64) -> Result<FittedModel> {
    check_data(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be finite and nonnegative"));
    }
    let knots = KnotSet::new(x.clone())?;
    let n = x.nrows();
    let s = n as f64 * lambda;
    let r = kernel_matrix_sym(kernel, x)?;
    let mut k = r.clone();
    for i in 0..n {
        k[(i, i)] += s;
    }
    let f = SpdFactorization::new(&k)?;
    let c = f.solve_vec(y)?;
    let gamma = &r * &c;
    let dof = (s + f.jitter_applied()) * f.inverse().trace();
    let rss = (y - &gamma).norm_squared();
    Ok(FittedModel {
        method: Method::Krr,
        interpolator: InterpolatorKind::Kernel,
        expansion: Some(KernelExpansion::new(
            kernel.clone(),
            RegressionBasis::None,
            x,
            Vec::new(),
            c.as_slice().to_vec(),
        )?),
        knots,
        gamma_hat: gamma.as_slice().to_vec(),
        lambda,
        kernel: Some(kernel.clone()),
        g_kind: RegressionBasis::None,
        spline_boundary: None,
        diagnostics: FitDiagnostics::new(gcv_from_dof(rss, dof, n), n as f64 - dof, f.jitter_applied()),
    })
}

/// KRR with lambda chosen by GCV over `grid`.
pub fn fit_krr_gcv(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: &KernelSpec,
    grid: &[f64],
) -> Result<FittedModel> {
    check_data(x, y)?;
    let r = kernel_matrix_sym(kernel, x)?;
    let spectrum = KernelSpectrum::new(&r, &DMatrix::zeros(x.nrows(), 0), y)?;
    let sel = spectrum.select(grid)?;
    fit_krr(x, y, kernel, sel.lambda)
}

/// Eigendecomposition `R = Q diag(e) Q'` of a kernel matrix, reused to
/// evaluate GCV of the universal-kriging smoother with nugget `n lambda` at
/// many lambdas in O(n q^2) each.
#[derive(Clone, Debug)]
pub(crate) struct KernelSpectrum {
    eig: Vec<f64>,
    y: DVector<f64>,
    g: DMatrix<f64>,
}

impl KernelSpectrum {
    pub(crate) fn new(r: &DMatrix<f64>, g: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let mut sym = r.clone();
        crate::numerics::symmetrize(&mut sym);
        let e = SymmetricEigen::new(sym);
        Ok(Self::from_parts(
            e.eigenvalues.iter().copied().collect(),
            &e.eigenvectors,
            g,
            y,
        ))
    }

    /// From an orthonormal basis `Q` (n x k, k <= n) and eigenvalues; the
    /// complement of `Q` carries eigenvalue zero.
    pub(crate) fn from_parts(eig: Vec<f64>, q: &DMatrix<f64>, g: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let n = y.len();
        let k = eig.len();
        let mut eig: Vec<f64> = eig.into_iter().map(|e| e.max(0.0)).collect();
        let mut yt = q.tr_mul(y);
        let mut gt = q.tr_mul(g);
        if k < n {
            // residual directions: fold their contributions into one zero-eigenvalue slot each
            let ry = y - q * &yt;
            let rg = g - q * &gt;
            let extra = DMatrix::from_fn(n, 1 + g.ncols(), |i, j| if j == 0 { ry[i] } else { rg[(i, j - 1)] });
            let qr = extra.qr();
            let full = qr.q();
            let basis = full.columns(0, full.ncols().min(n - k)).into_owned();
            let proj_y = basis.tr_mul(&ry);
            let proj_g = basis.tr_mul(&rg);
            let m = basis.ncols();
            eig.extend(std::iter::repeat_n(0.0, m));
            yt = DVector::from_iterator(k + m, yt.iter().chain(proj_y.iter()).copied());
            gt = DMatrix::from_fn(k + m, g.ncols(), |i, j| if i < k { gt[(i, j)] } else { proj_g[(i - k, j)] });
            // remaining n - k - m directions have zero projection of y and g
            let rest = n - k - m;
            return Self {
                eig,
                y: yt,
                g: gt,
            }
            .with_null(rest);
        }
        Self { eig, y: yt, g: gt }
    }

    fn with_null(mut self, rest: usize) -> Self {
        // directions orthogonal to y and G add only to the trace
        self.eig.extend(std::iter::repeat_n(0.0, rest));
        let k = self.y.len();
        self.y = self.y.clone().resize_vertically(k + rest, 0.0);
        self.g = self.g.clone().resize_vertically(k + rest, 0.0);
        self
    }

    pub(crate) fn n(&self) -> usize {
        self.eig.len()
    }

    /// `(rss, n - trace(H))` with nugget `s`.
    pub(crate) fn parts(&self, s: f64) -> (f64, f64) {
        let n = self.n();
        if s == 0.0 {
            return (0.0, 0.0);
        }
        let d: Vec<f64> = self.eig.iter().map(|e| 1.0 / (e + s)).collect();
        let q = self.g.ncols();
        let mut resid: Vec<f64> = d.iter().zip(self.y.iter()).map(|(a, b)| a * b).collect();
        let mut trace_p: f64 = d.iter().sum();
        if q > 0 {
            let dg = DMatrix::from_fn(n, q, |i, j| d[i] * self.g[(i, j)]);
            let c = self.g.tr_mul(&dg);
            let u = dg.tr_mul(&self.y);
            let Some(ch) = c.clone().cholesky() else {
                return (f64::NAN, f64::NAN);
            };
            let beta = ch.solve(&u);
            let fitted = &dg * beta;
            for (r, f) in resid.iter_mut().zip(fitted.iter()) {
                *r -= f;
            }
            let inner = ch.solve(&dg.tr_mul(&dg));
            trace_p -= inner.trace();
        }
        let rss = s * s * resid.iter().map(|r| r * r).sum::<f64>();
        (rss, s * trace_p)
    }

    pub(crate) fn trace(&self, lambda: f64) -> f64 {
        self.n() as f64 - self.parts(self.n() as f64 * lambda).1
    }

    pub(crate) fn gcv(&self, lambda: f64) -> f64 {
        let n = self.n();
        let (rss, dof) = self.parts(n as f64 * lambda);
        if rss.is_nan() {
            return f64::INFINITY;
        }
        gcv_from_dof(rss, dof, n)
    }

    pub(crate) fn select(&self, grid: &[f64]) -> Result<LambdaSelection> {
        if grid.is_empty() {
            return Err(invalid("lambda grid is empty"));
        }
        pick(
            grid.iter()
                .map(|&lambda| GcvPoint {
                    lambda,
                    gcv: self.gcv(lambda),
                })
                .collect(),
        )
    }
}

/// Universal-kriging smoother with nugget `n lambda`, shared by GPR and by
/// GPRR when the knots are the data.
pub(crate) struct KrigingFit {
    pub expansion: KernelExpansion,
    pub fitted: DVector<f64>,
    pub lambda: f64,
    pub gcv: f64,
    pub trace: f64,
    pub jitter: f64,
}

pub(crate) fn kriging_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: &KernelSpec,
    g_kind: RegressionBasis,
    policy: &LambdaPolicy,
) -> Result<KrigingFit> {
    check_data(x, y)?;
    let n = x.nrows();
    let g = regression_check(g_kind, x)?;
    let r = kernel_matrix_sym(kernel, x)?;
    let spectrum = KernelSpectrum::new(&r, &g, y)?;
    let lambda = match (policy.fixed_value()?, policy) {
        (Some(l), _) => l,
        (None, LambdaPolicy::Gcv { grid }) => spectrum.select(grid)?.lambda,
        _ => unreachable!(),
    };
    let mut k = r.clone();
    for i in 0..n {
        k[(i, i)] += n as f64 * lambda;
    }
    let f = SpdFactorization::new(&k)?;
    let (beta, c) = gls(|m| f.solve(m), &g, y)?;
    let fitted = &g * &beta + &r * &c;
    Ok(KrigingFit {
        expansion: KernelExpansion::new(kernel.clone(), g_kind, x, beta.as_slice().to_vec(), c.as_slice().to_vec())?,
        fitted,
        lambda,
        gcv: spectrum.gcv(lambda),
        trace: spectrum.trace(lambda),
        jitter: f.jitter_applied(),
    })
}

/// Generalized least squares for the regression coefficients given a solver
/// for `K^{-1}`: returns `(beta, K^{-1}(y - G beta))`.
pub(crate) fn gls(
    kinv: impl Fn(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    g: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let ymat = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    let kiy = kinv(&ymat)?.column(0).into_owned();
    if g.ncols() == 0 {
        return Ok((DVector::zeros(0), kiy));
    }
    let kig = kinv(g)?;
    let c = g.tr_mul(&kig);
    let cf = SpdFactorization::new(&c).map_err(|_| Error::RankDeficientRegression)?;
    if cf.jitter_applied() > 0.0 {
        return Err(Error::RankDeficientRegression);
    }
    let beta = cf.solve_vec(&g.tr_mul(&kiy))?;
    let c = kiy - kig * &beta;
    Ok((beta, c))
}

pub(crate) fn regression_check(g_kind: RegressionBasis, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = g_kind.matrix(x);
    if g.ncols() >= x.nrows() && g.ncols() > 0 {
        return Err(Error::RankDeficientRegression);
    }
    Ok(g)
}
