use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};
use crate::numerics::SpdFactorization;

/// Below this value of `1 - trace(H)/n` GCV is reported as `+inf`.
const DENOMINATOR_FLOOR: f64 = 1e-10;
/// GCV from the residual degrees of freedom `n - trace(H)`, which callers
/// can often form without cancellation.
pub(crate) fn gcv_from_dof(rss: f64, resid_dof: f64, n: usize) -> f64 {
    let r = resid_dof / n as f64;
    if r < DENOMINATOR_FLOOR {
        f64::INFINITY
    } else {
        rss / (n as f64 * r * r)
    }
}

/// GCV values within this relative distance of the minimum count as ties.
const TIE_TOLERANCE: f64 = 1e-10;

pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-8, 1e2, 50)
}

/// `k` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..k)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64))
        .collect()
}

fn check_shapes(b: &DMatrix<f64>, y: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<()> {
    let (n, m) = b.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if sigma.shape() != (m, m) {
        return Err(dims(format!(
            "penalty is {}x{}, B has {m} columns",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(())
}

fn factor_system(btb: &DMatrix<f64>, sigma: &DMatrix<f64>, s: f64) -> Result<SpdFactorization> {
    SpdFactorization::new(&(btb + sigma * s)).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => {
            Error::SingularSystem("B'B + n lambda Sigma is not invertible".into())
        }
        other => other,
    })
}

/// `(B'B + n lambda Sigma)^{-1} B'y`.
pub fn ridge_reconstruct(
    b: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    sigma: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    check_shapes(b, y, sigma)?;
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be nonnegative"));
    }
    let f = factor_system(&b.tr_mul(b), sigma, b.nrows() as f64 * lambda)?;
    f.solve_vec(&b.tr_mul(y))
}

/// `rss / (n (1 - trace/n)^2)`, or `+inf` once the denominator vanishes.
pub fn gcv_from_parts(rss: f64, trace: f64, n: usize) -> f64 {
    let r = 1.0 - trace / n as f64;
    if r < DENOMINATOR_FLOOR {
        f64::INFINITY
    } else {
        rss / (n as f64 * r * r)
    }
}

/// GCV of the ridge smoother `H = B (B'B + n lambda Sigma)^{-1} B'`.
pub fn gcv(b: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, sigma: &DMatrix<f64>) -> Result<f64> {
    check_shapes(b, y, sigma)?;
    let n = b.nrows();
    let btb = b.tr_mul(b);
    let f = factor_system(&btb, sigma, n as f64 * lambda)?;
    let gamma = f.solve_vec(&b.tr_mul(y))?;
    let rss = (y - b * gamma).norm_squared();
    let trace = f.solve(&btb)?.trace();
    Ok(gcv_from_parts(rss, trace, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcvPoint {
    pub lambda: f64,
    pub gcv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub gcv: f64,
    pub curve: Vec<GcvPoint>,
}

/// Minimizer over the grid; near-ties go to the larger lambda.
pub(crate) fn pick(curve: Vec<GcvPoint>) -> Result<LambdaSelection> {
    if curve.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    let best = curve.iter().map(|p| p.gcv).fold(f64::INFINITY, f64::min);
    let mut chosen = curve[0];
    let mut found = false;
    for p in &curve {
        let tie = if best.is_finite() {
            p.gcv <= best + TIE_TOLERANCE * best.abs()
        } else {
            true
        };
        if tie && (!found || p.lambda > chosen.lambda) {
            chosen = *p;
            found = true;
        }
    }
    Ok(LambdaSelection {
        lambda: chosen.lambda,
        gcv: chosen.gcv,
        curve,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    if grid.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(invalid("lambda grid values must be finite and nonnegative"));
    }
    Ok(())
}

/// Evaluates GCV over `grid` and returns the minimizer.
pub fn select_lambda(
    b: &DMatrix<f64>,
    y: &DVector<f64>,
    sigma: &DMatrix<f64>,
    grid: &[f64],
) -> Result<LambdaSelection> {
    check_shapes(b, y, sigma)?;
    check_grid(grid)?;
    match RidgePath::new(b, y, sigma)? {
        Some(path) => path.select(grid),
        None => {
            let curve = grid
                .iter()
                .map(|&lambda| GcvPoint {
                    lambda,
                    gcv: gcv(b, y, lambda, sigma).unwrap_or(f64::INFINITY),
                })
                .collect();
            pick(curve)
        }
    }
}

/// The ridge problem diagonalized once so every lambda costs O(m^2).
///
/// With `B'B = L L'` and `L^{-1} Sigma L^{-T} = Q E Q'`, the solution is
/// `L^{-T} Q (I + n lambda E)^{-1} Q' L^{-1} B'y`.
#[derive(Clone, Debug)]
pub struct RidgePath {
    n: usize,
    eig: Vec<f64>,
    z: DVector<f64>,
    back: DMatrix<f64>,
    ls_rss: f64,
}

impl RidgePath {
    /// `None` when `B'B` is not numerically positive definite.
    pub fn new(b: &DMatrix<f64>, y: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<Option<Self>> {
        check_shapes(b, y, sigma)?;
        let btb = b.tr_mul(b);
        let Some(chol) = Cholesky::new(btb) else {
            return Ok(None);
        };
        let l = chol.l();
        let linv_sigma = l
            .solve_lower_triangular(sigma)
            .ok_or_else(|| Error::SingularSystem("singular Gram factor".into()))?;
        let mut whitened = l
            .solve_lower_triangular(&linv_sigma.transpose())
            .ok_or_else(|| Error::SingularSystem("singular Gram factor".into()))?;
        crate::numerics::symmetrize(&mut whitened);
        let eigen = SymmetricEigen::new(whitened);
        let back = l
            .transpose()
            .solve_upper_triangular(&eigen.eigenvectors)
            .ok_or_else(|| Error::SingularSystem("singular Gram factor".into()))?;
        let bty = b.tr_mul(y);
        let w = l
            .solve_lower_triangular(&bty)
            .ok_or_else(|| Error::SingularSystem("singular Gram factor".into()))?;
        let z = eigen.eigenvectors.tr_mul(&w);
        let ls_gamma = chol.solve(&bty);
        let ls_rss = (y - b * ls_gamma).norm_squared();
        Ok(Some(Self {
            n: b.nrows(),
            eig: eigen.eigenvalues.iter().map(|e| e.max(0.0)).collect(),
            z,
            back,
            ls_rss,
        }))
    }

    /// The `B = I` case: only `Sigma` is diagonalized.
    pub fn identity(y: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if sigma.shape() != (n, n) {
            return Err(dims("penalty must be n x n when B = I"));
        }
        let mut s = sigma.clone();
        crate::numerics::symmetrize(&mut s);
        let eigen = SymmetricEigen::new(s);
        Ok(Self {
            n,
            eig: eigen.eigenvalues.iter().map(|e| e.max(0.0)).collect(),
            z: eigen.eigenvectors.tr_mul(y),
            back: eigen.eigenvectors,
            ls_rss: 0.0,
        })
    }

    fn shrink(&self, lambda: f64) -> impl Iterator<Item = f64> + '_ {
        let s = self.n as f64 * lambda;
        self.eig.iter().map(move |e| 1.0 / (1.0 + s * e))
    }

    pub fn gamma(&self, lambda: f64) -> DVector<f64> {
        let scaled = DVector::from_iterator(
            self.z.len(),
            self.shrink(lambda).zip(self.z.iter()).map(|(d, z)| d * z),
        );
        &self.back * scaled
    }

    pub fn trace(&self, lambda: f64) -> f64 {
        self.shrink(lambda).sum()
    }

    pub fn rss(&self, lambda: f64) -> f64 {
        let s = self.n as f64 * lambda;
        self.ls_rss
            + self
                .eig
                .iter()
                .zip(self.z.iter())
                .map(|(e, z)| (s * e / (1.0 + s * e) * z).powi(2))
                .sum::<f64>()
    }

    /// `n - trace(H)`.
    pub fn residual_dof(&self, lambda: f64) -> f64 {
        let s = self.n as f64 * lambda;
        (self.n - self.eig.len()) as f64
            + self.eig.iter().map(|e| s * e / (1.0 + s * e)).sum::<f64>()
    }

    pub fn gcv(&self, lambda: f64) -> f64 {
        gcv_from_dof(self.rss(lambda), self.residual_dof(lambda), self.n)
    }

    pub fn select(&self, grid: &[f64]) -> Result<LambdaSelection> {
        check_grid(grid)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let g = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        (b, y, &g * g.transpose())
    }

    fn brute_gcv(b: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, sigma: &DMatrix<f64>) -> f64 {
        let n = b.nrows() as f64;
        let h = b * (b.transpose() * b + sigma * (n * lambda)).try_inverse().unwrap() * b.transpose();
        let r = y - &h * y;
        r.norm_squared() / (n * (1.0 - h.trace() / n).powi(2))
    }

    #[test]
    fn identity_shrinkage() {
        let y = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let eye = DMatrix::identity(4, 4);
        for lambda in [0.01, 0.3, 2.0] {
            let g = ridge_reconstruct(&eye, &y, lambda, &eye).unwrap();
            assert!((g - &y / (1.0 + 4.0 * lambda)).amax() < 1e-14);
            let v = gcv(&eye, &y, lambda, &eye).unwrap();
            assert!((v - y.norm_squared() / 4.0).abs() < 1e-12);
        }
        assert_eq!(gcv(&eye, &y, 0.0, &eye).unwrap(), f64::INFINITY);
    }

    #[test]
    fn least_squares_when_unpenalized() {
        let (b, _, sigma) = random(5, 5, 1);
        let x = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.0, 3.0]);
        let y = &b * &x;
        let g = ridge_reconstruct(&b, &y, 0.0, &sigma).unwrap();
        assert!((g - x).amax() < 1e-9);
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let (b, y, _) = random(30, 5, 2);
        let lambda = 0.1;
        let eye = DMatrix::identity(5, 5);
        let g = ridge_reconstruct(&b, &y, lambda, &eye).unwrap();
        // d/dgamma of |y - B g|^2 / n + lambda g'g
        let grad = (b.transpose() * (&b * &g - &y)) * (2.0 / 30.0) + &g * (2.0 * lambda);
        assert!(grad.norm() < 1e-6);
    }

    #[test]
    fn gcv_matches_explicit_hat() {
        for (n, m, seed) in [(40usize, 6usize, 3u64), (200, 15, 4), (25, 25, 5)] {
            let (b, y, sigma) = random(n, m, seed);
            for lambda in [1e-4, 1e-2, 1.0] {
                let brute = brute_gcv(&b, &y, lambda, &sigma);
                let direct = gcv(&b, &y, lambda, &sigma).unwrap();
                let path = RidgePath::new(&b, &y, &sigma).unwrap().unwrap();
                assert!(((direct - brute) / brute).abs() < 1e-8);
                assert!(((path.gcv(lambda) - brute) / brute).abs() < 1e-8, "n={n} lambda={lambda}");
                let g = ridge_reconstruct(&b, &y, lambda, &sigma).unwrap();
                assert!((path.gamma(lambda) - &g).amax() < 1e-8 * g.amax().max(1.0));
            }
        }
    }

    #[test]
    fn identity_path_matches_general() {
        let (_, y, sigma) = random(12, 12, 6);
        let eye = DMatrix::identity(12, 12);
        let p = RidgePath::identity(&y, &sigma).unwrap();
        for lambda in [1e-3, 0.1, 10.0] {
            assert!(((p.gcv(lambda) - brute_gcv(&eye, &y, lambda, &sigma)) / p.gcv(lambda)).abs() < 1e-9);
        }
    }

    #[test]
    fn selection_rules() {
        let (b, y, sigma) = random(40, 6, 7);
        let s = select_lambda(&b, &y, &sigma, &[0.05]).unwrap();
        assert_eq!(s.lambda, 0.05);
        let eye = DMatrix::identity(10, 10);
        let y10 = DVector::from_fn(10, |i, _| i as f64);
        let grid = default_lambda_grid();
        let flat = select_lambda(&eye, &y10, &eye, &grid).unwrap();
        assert_eq!(flat.lambda, 100.0);
        assert_eq!(flat.curve.len(), 50);
        assert!(select_lambda(&b, &y, &sigma, &[]).is_err());
    }

    #[test]
    fn singular_gram_falls_back() {
        let (b, y, _) = random(5, 8, 8);
        let sigma = DMatrix::identity(8, 8);
        assert!(RidgePath::new(&b, &y, &sigma).unwrap().is_none());
        let s = select_lambda(&b, &y, &sigma, &[0.01, 0.1]).unwrap();
        assert!(s.gcv.is_finite());
    }

    #[test]
    fn grid_shape() {
        let g = default_lambda_grid();
        assert!((g[0] - 1e-8).abs() < 1e-20);
        assert!((g[49] - 1e2).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
