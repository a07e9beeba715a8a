use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_data, default_lambda_grid, ridge_reconstruct, select_lambda};
use crate::error::{dims, invalid, Result};
use crate::interpolators::{GpBasis, KnotSet, RegressionBasis};
use crate::kernels::KernelSpec;

/// Objective minimized over the Gaussian scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
#[derive(Default)]
pub enum ParamCriterion {
    /// Residual sum of squares of the unpenalized fit.
    #[default]
    LeastSquares,
    /// GCV minimized over a lambda grid.
    Gcv { grid: Vec<f64> },
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParamOptions {
    pub max_iter: usize,
    /// Stop once an iteration lowers the objective by less than this fraction.
    pub tol: f64,
    pub criterion: ParamCriterion,
    /// Search box for `log10(theta_j)`.
    pub log10_bounds: (f64, f64),
    pub golden_iters: usize,
}

impl Default for KernelParamOptions {
    fn default() -> Self {
        Self {
            max_iter: 10,
            tol: 1e-4,
            criterion: ParamCriterion::LeastSquares,
            log10_bounds: (-2.0, 3.0),
            golden_iters: 40,
        }
    }
}

impl KernelParamOptions {
    pub fn gcv() -> Self {
        Self {
            criterion: ParamCriterion::Gcv {
                grid: default_lambda_grid(),
            },
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParamEstimate {
    pub theta: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    pub lambda: f64,
    /// Objective after each iteration; non-increasing.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

struct Problem<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    knots: &'a KnotSet,
    g_kind: RegressionBasis,
    criterion: &'a ParamCriterion,
}

impl Problem<'_> {
    fn design(&self, theta: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let kernel = KernelSpec::gaussian(theta.to_vec())?;
        let basis = GpBasis::build(self.knots, &kernel, self.g_kind)?;
        Ok((basis.design_matrix(self.x)?, basis.penalty()))
    }

    /// Best `gamma` for fixed `theta` with the objective it attains.
    fn gamma_step(&self, theta: &[f64]) -> Result<(DVector<f64>, f64, f64)> {
        let (b, sigma) = self.design(theta)?;
        let n = self.x.nrows() as f64;
        match self.criterion {
            ParamCriterion::LeastSquares => {
                let gamma = ridge_reconstruct(&b, self.y, 0.0, &sigma)?;
                let obj = (self.y - &b * &gamma).norm_squared() / n;
                Ok((gamma, 0.0, obj))
            }
            ParamCriterion::Gcv { grid } => {
                let sel = select_lambda(&b, self.y, &sigma, grid)?;
                let gamma = ridge_reconstruct(&b, self.y, sel.lambda, &sigma)?;
                Ok((gamma, sel.lambda, sel.gcv))
            }
        }
    }

    /// Objective as a function of `theta` during the theta step.
    fn theta_objective(&self, theta: &[f64], gamma: &DVector<f64>) -> f64 {
        let value = match self.criterion {
            ParamCriterion::LeastSquares => self
                .design(theta)
                .map(|(b, _)| (self.y - b * gamma).norm_squared() / self.x.nrows() as f64),
            ParamCriterion::Gcv { .. } => self.gamma_step(theta).map(|r| r.2),
        };
        match value {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }
}

/// Points of the coarse scan that picks the golden-section bracket.
const SCAN_POINTS: usize = 21;

/// Coarse scan of `[lo, hi]`, then golden section between the neighbours of
/// the best scanned point.
fn bracketed_search(lo: f64, hi: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let (mut best_k, mut best_v) = (0, f64::INFINITY);
    for k in 0..SCAN_POINTS {
        let v = f(lo + step * k as f64);
        if v < best_v {
            best_k = k;
            best_v = v;
        }
    }
    let a = lo + step * best_k.saturating_sub(1) as f64;
    let b = (lo + step * (best_k + 1) as f64).min(hi);
    let (t, v) = golden_section(a, b, iters, &mut f);
    if v <= best_v {
        (t, v)
    } else {
        (lo + step * best_k as f64, best_v)
    }
}

fn golden_section(lo: f64, hi: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Block coordinate descent over `(gamma, theta)` for a Gaussian kernel:
/// a gamma step (unpenalized or GCV-tuned ridge fit) alternates with a
/// golden-section search on each `log10(theta_j)`. A theta move is kept only
/// when it lowers the objective, so the recorded objective never increases.
pub fn estimate_kernel_params(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &KnotSet,
    g_kind: RegressionBasis,
    theta0: &[f64],
    options: &KernelParamOptions,
) -> Result<KernelParamEstimate> {
    check_data(x, y)?;
    if theta0.len() != x.ncols() || knots.dim() != x.ncols() {
        return Err(dims(format!(
            "theta has {} entries, data {} columns, knots {}",
            theta0.len(),
            x.ncols(),
            knots.dim()
        )));
    }
    if options.max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    let (lo, hi) = options.log10_bounds;
    if !(lo < hi) {
        return Err(invalid("empty theta search box"));
    }
    let problem = Problem {
        x,
        y,
        knots,
        g_kind,
        criterion: &options.criterion,
    };
    let mut theta = theta0.to_vec();
    let (mut gamma, mut lambda, mut obj) = problem.gamma_step(&theta)?;
    let mut trace = vec![obj];
    let floor = 1e-14 * (y.norm_squared() / y.len() as f64).max(f64::MIN_POSITIVE);
    let mut iterations = 1;
    while iterations < options.max_iter && obj > floor {
        let last_theta = theta.clone();
        let mut current = problem.theta_objective(&theta, &gamma);
        for j in 0..theta.len() {
            let mut trial = theta.clone();
            let (t, v) = bracketed_search(lo, hi, options.golden_iters, |t| {
                trial[j] = 10f64.powf(t);
                problem.theta_objective(&trial, &gamma)
            });
            if v < current {
                theta[j] = 10f64.powf(t);
                current = v;
            }
        }
        let (g, l, o) = problem.gamma_step(&theta)?;
        iterations += 1;
        let previous = obj;
        if o <= previous {
            gamma = g;
            lambda = l;
            obj = o;
        } else {
            theta = last_theta;
        }
        trace.push(obj);
        if previous - obj < options.tol * previous {
            break;
        }
    }
    Ok(KernelParamEstimate {
        theta,
        gamma_hat: gamma.as_slice().to_vec(),
        lambda,
        objective: trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolators::kernel_interp_eval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, d, |_, _| rng.gen::<f64>())
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (t, v) = golden_section(-2.0, 3.0, 40, |t| (t - 1.1).powi(2) + 0.5);
        assert!((t - 1.1).abs() < 1e-6);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_response_fits_at_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = uniform(60, 2, &mut rng);
        let y = DVector::from_element(60, 4.0);
        let knots = KnotSet::subset(&x, &(0..8).collect::<Vec<_>>()).unwrap();
        let est = estimate_kernel_params(&x, &y, &knots, RegressionBasis::Constant, &[3.0, 50.0], &KernelParamOptions::default()).unwrap();
        assert_eq!(est.iterations, 1);
        assert!(est.objective[0] < 1e-20);
    }

    #[test]
    fn recovers_a_planted_interpolant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 2;
        let knots = KnotSet::new(uniform(15, d, &mut rng)).unwrap();
        let truth_kernel = KernelSpec::gaussian_iso(d, 10.0).unwrap();
        let values: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |p: &[f64]| kernel_interp_eval(&knots, &values, &truth_kernel, RegressionBasis::None, p).unwrap();
        let x = uniform(500, d, &mut rng);
        let y = DVector::from_fn(500, |i, _| f(&[x[(i, 0)], x[(i, 1)]]));
        let options = KernelParamOptions { max_iter: 60, tol: 1e-10, ..Default::default() };
        let est = estimate_kernel_params(&x, &y, &knots, RegressionBasis::None, &[3.0, 40.0], &options).unwrap();
        assert!(*est.objective.last().unwrap() < 1e-6, "{:?}", est.objective);
        let kernel = KernelSpec::gaussian(est.theta.clone()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            for j in 0..=20 {
                let p = [i as f64 / 20.0, j as f64 / 20.0];
                let v = kernel_interp_eval(&knots, &est.gamma_hat, &kernel, RegressionBasis::None, &p).unwrap();
                worst = worst.max((v - f(&p)).abs());
            }
        }
        assert!(worst < 1e-3, "sup error {worst}, theta {:?}", est.theta);
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(10 + seed);
            let x = uniform(120, 2, &mut rng);
            let y = DVector::from_fn(120, |i, _| (4.0 * x[(i, 0)]).sin() * x[(i, 1)] + 0.3 * rng.gen_range(-1.0..1.0));
            let knots = KnotSet::subset(&x, &(0..12).collect::<Vec<_>>()).unwrap();
            for options in [KernelParamOptions::default(), KernelParamOptions::gcv()] {
                let est = estimate_kernel_params(&x, &y, &knots, RegressionBasis::Linear, &[12.5, 12.5], &options).unwrap();
                assert!(est.objective.windows(2).all(|w| w[1] <= w[0]), "{:?}", est.objective);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_fn(10, 2, |i, j| (i + j) as f64 / 20.0);
        let y = DVector::zeros(10);
        let knots = KnotSet::subset(&x, &[0, 3, 6]).unwrap();
        let o = KernelParamOptions::default();
        assert!(estimate_kernel_params(&x, &y, &knots, RegressionBasis::None, &[1.0], &o).is_err());
    }
}
