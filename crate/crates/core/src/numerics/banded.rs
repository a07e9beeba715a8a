use nalgebra::DMatrix;

use crate::error::{dims, invalid, Error, Result};

/// Symmetric banded matrix stored by diagonals: `diags[k][i] = A[i + k, i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSpdMatrix {
    n: usize,
    diags: Vec<Vec<f64>>,
}

impl BandedSpdMatrix {
    pub const MAX_BANDWIDTH: usize = 2;

    pub fn zeros(n: usize, bandwidth: usize) -> Result<Self> {
        if bandwidth > Self::MAX_BANDWIDTH {
            return Err(invalid(format!(
                "bandwidth {bandwidth} exceeds {}",
                Self::MAX_BANDWIDTH
            )));
        }
        let diags = (0..=bandwidth)
            .map(|k| vec![0.0; n.saturating_sub(k)])
            .collect();
        Ok(Self { n, diags })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            diags: vec![vec![1.0; n]],
        }
    }

    /// Builds from the main diagonal followed by sub-diagonals.
    pub fn from_diagonals(diags: Vec<Vec<f64>>) -> Result<Self> {
        let Some(main) = diags.first() else {
            return Err(invalid("at least the main diagonal is required"));
        };
        let n = main.len();
        if diags.len() > Self::MAX_BANDWIDTH + 1 {
            return Err(invalid("bandwidth exceeds 2"));
        }
        for (k, d) in diags.iter().enumerate() {
            if d.len() != n.saturating_sub(k) {
                return Err(dims(format!(
                    "diagonal {k} has length {}, expected {}",
                    d.len(),
                    n.saturating_sub(k)
                )));
            }
        }
        Ok(Self { n, diags })
    }

    /// `n lambda M'M + I` where `M` is the (n-2) x n second-difference operator.
    pub fn second_difference_system(n: usize, lambda: f64) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("second differences need n >= 3, got {n}")));
        }
        if !(lambda >= 0.0) {
            return Err(invalid("lambda must be nonnegative"));
        }
        let s = n as f64 * lambda;
        // M'M has diagonals (1, 5, 6, ..., 6, 5, 1), (-2, -4, ..., -4, -2) and (1, ..., 1)
        let mut main = vec![1.0 + 6.0 * s; n];
        let mut sub1 = vec![-4.0 * s; n - 1];
        let sub2 = vec![s; n - 2];
        if n == 3 {
            main.copy_from_slice(&[1.0 + s, 1.0 + 4.0 * s, 1.0 + s]);
        } else {
            main[0] = 1.0 + s;
            main[1] = 1.0 + 5.0 * s;
            main[n - 2] = 1.0 + 5.0 * s;
            main[n - 1] = 1.0 + s;
        }
        sub1[0] = -2.0 * s;
        sub1[n - 2] = -2.0 * s;
        Ok(Self {
            n,
            diags: vec![main, sub1, sub2],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth() {
            0.0
        } else {
            self.diags[k][lo]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diags[0].iter().zip(x).map(|(d, v)| d * v).collect();
        for (k, diag) in self.diags.iter().enumerate().skip(1) {
            for (i, a) in diag.iter().enumerate() {
                out[i + k] += a * x[i];
                out[i] += a * x[i + k];
            }
        }
        out
    }

    /// LDL' factorization in O(n).
    pub fn factor(&self) -> Result<BandedLdl> {
        let n = self.n;
        let band = |k: usize| self.diags.get(k).map_or(&[][..], Vec::as_slice);
        let (a1, a2) = (band(1), band(2));
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for j in 0..n {
            let mut dj = self.diags[0][j];
            if j >= 1 {
                dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
            }
            if j >= 2 {
                dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
            }
            if !(dj > 0.0) || !dj.is_finite() {
                return Err(Error::NotPositiveDefinite { jitter: 0.0 });
            }
            d[j] = dj;
            let mut s1 = a1.get(j).copied().unwrap_or(0.0);
            if j >= 1 {
                s1 -= l2[j - 1] * l1[j - 1] * d[j - 1];
            }
            l1[j] = s1 / dj;
            l2[j] = a2.get(j).copied().unwrap_or(0.0) / dj;
        }
        Ok(BandedLdl { n, d, l1, l2 })
    }
}

/// Banded `L D L'` factorization with unit lower-triangular `L` of bandwidth
/// at most two.
#[derive(Clone, Debug)]
pub struct BandedLdl {
    n: usize,
    d: Vec<f64>,
    // l1[j] = L[j + 1, j], l2[j] = L[j + 2, j]; zero past the end
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedLdl {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(dims(format!(
                "rhs has length {}, system has dimension {}",
                rhs.len(),
                self.n
            )));
        }
        let n = self.n;
        let (l1, l2) = (&self.l1, &self.l2);
        let mut z = rhs.to_vec();
        for i in 1..n {
            let mut s = z[i] - l1[i - 1] * z[i - 1];
            if i >= 2 {
                s -= l2[i - 2] * z[i - 2];
            }
            z[i] = s;
        }
        for (zi, di) in z.iter_mut().zip(&self.d) {
            *zi /= di;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let mut s = z[i] - l1[i] * z[i + 1];
            if i + 2 < n {
                s -= l2[i] * z[i + 2];
            }
            z[i] = s;
        }
        Ok(z)
    }

    /// Diagonal of the inverse by the Takahashi recurrences; only the band of
    /// the inverse is ever formed, so this is O(n).
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let (l1, l2) = (&self.l1, &self.l2);
        // z0[i] = Z[i, i], z1[i] = Z[i + 1, i], z2[i] = Z[i + 2, i]
        let mut z0 = vec![0.0; n + 2];
        let mut z1 = vec![0.0; n + 2];
        let mut z2 = vec![0.0; n + 2];
        for i in (0..n).rev() {
            let (a, b) = (l1[i], l2[i]);
            z1[i] = -(a * z0[i + 1] + b * z1[i + 1]);
            z2[i] = -(a * z1[i + 1] + b * z0[i + 2]);
            z0[i] = 1.0 / self.d[i] - (a * z1[i] + b * z2[i]);
        }
        z0.truncate(n);
        z0
    }

    pub fn trace_inverse(&self) -> f64 {
        self.inverse_diagonal().iter().sum()
    }
}

/// Solves a banded SPD system in O(n).
pub fn banded_spd_solve(m: &BandedSpdMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    m.factor()?.solve(rhs)
}
