//! Stationary correlation functions `R(h)` and the matrices built from them.
//!
//! Inputs are assumed to live in `[0, 1]^d` already; nothing here rescales.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};
use crate::numerics::SpdFactorization;

/// Per-coordinate scale used by every experiment driver unless estimated.
pub const DEFAULT_THETA: f64 = 12.5;

const SUPPORTED_NU: [f64; 3] = [0.5, 1.5, 2.5];

/// Correlation family and parameters.
///
/// Serializes as `{"family":"gaussian","theta":[...]}` or
/// `{"family":"matern","nu":0.5,"phi":1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-sum_j theta_j h_j^2)`.
    Gaussian { theta: Vec<f64> },
    /// Product over coordinates of the Matern correlation with argument
    /// `2 sqrt(nu) |h_j| / phi`; only half-integer `nu` is supported.
    Matern { nu: f64, phi: f64 },
}

impl KernelSpec {
    pub fn gaussian(theta: Vec<f64>) -> Result<Self> {
        let spec = KernelSpec::Gaussian { theta };
        spec.validate()?;
        Ok(spec)
    }

    /// Gaussian kernel with the same `theta` on every coordinate.
    pub fn gaussian_iso(d: usize, theta: f64) -> Result<Self> {
        Self::gaussian(vec![theta; d])
    }

    pub fn matern(nu: f64, phi: f64) -> Result<Self> {
        let spec = KernelSpec::Matern { nu, phi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Gaussian { theta } => {
                if theta.is_empty() {
                    return Err(invalid("Gaussian kernel needs at least one theta"));
                }
                if theta.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
                    return Err(invalid("Gaussian theta must be positive and finite"));
                }
            }
            KernelSpec::Matern { nu, phi } => {
                if !SUPPORTED_NU.contains(nu) {
                    return Err(Error::UnsupportedNu(*nu));
                }
                if !(*phi > 0.0) || !phi.is_finite() {
                    return Err(invalid("Matern phi must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    /// Input dimension the kernel is tied to; Matern accepts any dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            KernelSpec::Gaussian { theta } => Some(theta.len()),
            KernelSpec::Matern { .. } => None,
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(k) if k != d => Err(dims(format!(
                "kernel has {k} coordinates, points have {d}"
            ))),
            _ => Ok(()),
        }
    }

    /// `R(h)`.
    pub fn value(&self, h: &[f64]) -> Result<f64> {
        self.validate()?;
        self.check_dim(h.len())?;
        Ok(self.eval(h.iter().copied()))
    }

    /// `R(p - q)` without validation.
    #[inline]
    pub(crate) fn between(&self, p: &[f64], q: &[f64]) -> f64 {
        self.eval(p.iter().zip(q).map(|(a, b)| a - b))
    }

    #[inline]
    fn eval(&self, h: impl Iterator<Item = f64>) -> f64 {
        match self {
            KernelSpec::Gaussian { theta } => {
                let s: f64 = theta.iter().zip(h).map(|(t, hj)| t * hj * hj).sum();
                (-s).exp()
            }
            KernelSpec::Matern { nu, phi } => {
                let scale = 2.0 * nu.sqrt() / phi;
                let mut prod = 1.0;
                let mut sum_z = 0.0;
                for hj in h {
                    let z = scale * hj.abs();
                    sum_z += z;
                    prod *= if *nu == 0.5 {
                        1.0
                    } else if *nu == 1.5 {
                        1.0 + z
                    } else {
                        1.0 + z + z * z / 3.0
                    };
                }
                prod * (-sum_z).exp()
            }
        }
    }

    /// Returns a copy with new Gaussian scales; errors for Matern.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        match self {
            KernelSpec::Gaussian { .. } => Self::gaussian(theta),
            KernelSpec::Matern { .. } => Err(invalid("only Gaussian kernels carry theta")),
        }
    }
}

/// Rows of `p` laid out contiguously, one point per `d`-chunk.
pub(crate) fn row_major(p: &DMatrix<f64>) -> Vec<f64> {
    p.transpose().as_slice().to_vec()
}

/// Kernel matrix with entries `R(p_i - q_j)`.
pub fn kernel_matrix(spec: &KernelSpec, p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if p.ncols() != q.ncols() {
        return Err(dims(format!(
            "point sets have {} and {} columns",
            p.ncols(),
            q.ncols()
        )));
    }
    spec.check_dim(p.ncols())?;
    let d = p.ncols();
    if d == 0 {
        return Err(dims("points must have at least one coordinate"));
    }
    let pr = row_major(p);
    let qr = row_major(q);
    let (k, l) = (p.nrows(), q.nrows());
    let mut out = DMatrix::zeros(k, l);
    for j in 0..l {
        let qj = &qr[j * d..(j + 1) * d];
        for i in 0..k {
            out[(i, j)] = spec.between(&pr[i * d..(i + 1) * d], qj);
        }
    }
    Ok(out)
}

/// Symmetric kernel matrix of a point set with itself (unit diagonal).
pub fn kernel_matrix_sym(spec: &KernelSpec, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spec.validate()?;
    spec.check_dim(p.ncols())?;
    let d = p.ncols();
    let pr = row_major(p);
    let n = p.nrows();
    let mut out = DMatrix::identity(n, n);
    for j in 0..n {
        let pj = &pr[j * d..(j + 1) * d];
        for i in j + 1..n {
            let v = spec.between(&pr[i * d..(i + 1) * d], pj);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Correlation vector `r_A(x) = (R(x - a_1), ..., R(x - a_m))`.
pub(crate) fn correlation_vector(spec: &KernelSpec, knots_rm: &[f64], d: usize, x: &[f64], out: &mut [f64]) {
    for (o, a) in out.iter_mut().zip(knots_rm.chunks_exact(d)) {
        *o = spec.between(x, a);
    }
}

/// Factored `R_A` with the numerics jitter ladder applied.
pub fn correlation_matrix_factored(
    spec: &KernelSpec,
    knots: &crate::interpolators::KnotSet,
) -> Result<SpdFactorization> {
    let r = kernel_matrix_sym(spec, knots.points())?;
    SpdFactorization::new(&r)
}
