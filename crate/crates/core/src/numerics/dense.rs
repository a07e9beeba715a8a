use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{dims, Error, Result};

/// Relative nugget levels tried in order, scaled by the mean diagonal.
pub const JITTER_LADDER: [f64; 3] = [0.0, 1e-10, 1e-8];

/// Smallest accepted eigenvalue relative to the mean diagonal; below it a
/// completed factorization is treated as numerically singular.
const EIGEN_FLOOR: f64 = 1e-12;
const INVERSE_ITERATIONS: usize = 12;

/// Inverse-iteration estimate of the smallest eigenvalue of `L L'`.
fn smallest_eigenvalue(chol: &Cholesky<f64, Dyn>) -> f64 {
    let n = chol.l_dirty().nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    v /= v.norm();
    let mut growth = 0.0;
    for _ in 0..INVERSE_ITERATIONS {
        let w = chol.solve(&v);
        growth = w.norm();
        if !(growth.is_finite() && growth > 0.0) {
            return 0.0;
        }
        v = w / growth;
    }
    1.0 / growth
}

/// Cholesky factor of a symmetric positive definite matrix, possibly jittered.
#[derive(Clone, Debug)]
pub struct SpdFactorization {
    chol: Cholesky<f64, Dyn>,
    jitter_applied: f64,
}

impl SpdFactorization {
    /// Factorizes `a` (only its lower triangle is read), walking the jitter
    /// ladder until the factorization succeeds.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(dims(format!(
                "expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if n == 0 {
            return Err(dims("cannot factorize an empty matrix"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite { jitter: 0.0 });
        }
        let scale = a.diagonal().mean();
        if scale <= 0.0 {
            return Err(Error::NotPositiveDefinite { jitter: 0.0 });
        }
        let mut last = 0.0;
        for rel in JITTER_LADDER {
            let jitter = rel * scale;
            let mut m = a.clone();
            if jitter > 0.0 {
                for i in 0..n {
                    m[(i, i)] += jitter;
                }
            }
            if let Some(chol) = Cholesky::new(m) {
                let last_rung = rel == JITTER_LADDER[JITTER_LADDER.len() - 1];
                if !last_rung && smallest_eigenvalue(&chol) < EIGEN_FLOOR * scale {
                    last = jitter;
                    continue;
                }
                return Ok(Self {
                    chol,
                    jitter_applied: jitter,
                });
            }
            last = jitter;
        }
        Err(Error::NotPositiveDefinite { jitter: last })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Absolute nugget added to the diagonal (0 when none was needed).
    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    /// Lower-triangular factor `L` with `L L' = A + jitter I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `L L'`, the matrix that was actually factorized.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose()
    }

    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(rhs.nrows())?;
        Ok(self.chol.solve(rhs))
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_rows(rhs.len())?;
        Ok(self.chol.solve(rhs))
    }

    /// `L^{-1} rhs`.
    pub fn solve_lower(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(rhs.nrows())?;
        self.chol
            .l_dirty()
            .solve_lower_triangular(rhs)
            .ok_or_else(|| Error::SingularSystem("zero pivot in triangular solve".into()))
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let mut inv = self.chol.inverse();
        symmetrize(&mut inv);
        inv
    }

    pub fn ln_determinant(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(dims(format!(
                "right-hand side has {rows} rows, factor has dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Solution of an SPD system together with the jitter that made it solvable.
#[derive(Clone, Debug)]
pub struct SpdSolution {
    pub x: DMatrix<f64>,
    pub jitter_applied: f64,
}

/// Solves `(A + jitter I) X = rhs` with the smallest jitter on the ladder that works.
pub fn spd_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<SpdSolution> {
    if a.nrows() != rhs.nrows() {
        return Err(dims(format!(
            "matrix is {}x{}, right-hand side has {} rows",
            a.nrows(),
            a.ncols(),
            rhs.nrows()
        )));
    }
    let f = SpdFactorization::new(a)?;
    Ok(SpdSolution {
        x: f.solve(rhs)?,
        jitter_applied: f.jitter_applied(),
    })
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
