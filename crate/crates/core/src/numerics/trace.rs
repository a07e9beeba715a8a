use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BandedLdl, SpdFactorization};
use crate::error::{dims, Error, Result};

pub const HUTCHINSON_PROBES: usize = 64;

/// How the trace of a banded inverse is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
#[derive(Default)]
pub enum TracePolicy {
    /// Selected inversion; exact and O(n).
    #[default]
    Exact,
    /// Rademacher probes from a seeded stream.
    Hutchinson { probes: usize, seed: u64 },
}


#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: f64,
    /// True when `value` is a Monte Carlo estimate.
    pub stochastic: bool,
    pub policy: TracePolicy,
}

/// `trace(B (B'B + n lambda Sigma)^{-1} B')`, computed as
/// `trace((B'B + n lambda Sigma)^{-1} B'B)` on the m x m side.
pub fn hat_trace(b: &DMatrix<f64>, sigma: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    let (n, m) = b.shape();
    if sigma.shape() != (m, m) {
        return Err(dims(format!(
            "Sigma is {}x{}, B has {m} columns",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let btb = b.transpose() * b;
    let system = &btb + sigma * (n as f64 * lambda);
    let f = SpdFactorization::new(&system).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => {
            Error::SingularSystem("B'B + n lambda Sigma is not invertible".into())
        }
        other => other,
    })?;
    Ok(f.solve(&btb)?.trace())
}

/// Trace of the inverse of a factored banded system, i.e. the hat-matrix trace
/// of the finite-difference smoother (B = I).
pub fn banded_hat_trace(system: &BandedLdl, policy: TracePolicy) -> Result<TraceEstimate> {
    let value = match policy {
        TracePolicy::Exact => system.trace_inverse(),
        TracePolicy::Hutchinson { probes, seed } => {
            if probes == 0 {
                return Err(crate::error::invalid("Hutchinson needs at least one probe"));
            }
            let n = system.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = 0.0;
            let mut z = vec![0.0; n];
            for _ in 0..probes {
                for v in z.iter_mut() {
                    *v = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
                let x = system.solve(&z)?;
                acc += z.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            }
            acc / probes as f64
        }
    };
    Ok(TraceEstimate {
        value,
        stochastic: matches!(policy, TracePolicy::Hutchinson { .. }),
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::BandedSpdMatrix;

    fn explicit_hat(b: &DMatrix<f64>, sigma: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
        let n = b.nrows() as f64;
        let inner = (b.transpose() * b + sigma * (n * lambda)).try_inverse().unwrap();
        b * inner * b.transpose()
    }

    #[test]
    fn identity_case_closed_form() {
        for &n in &[1usize, 5, 40] {
            for &lambda in &[1e-4, 0.01, 0.5, 3.0] {
                let eye = DMatrix::identity(n, n);
                let t = hat_trace(&eye, &eye, lambda).unwrap();
                let expect = n as f64 / (1.0 + n as f64 * lambda);
                assert!((t - expect).abs() < 1e-12, "{t} vs {expect}");
            }
        }
    }

    #[test]
    fn zero_lambda_square_invertible_is_n() {
        let b = DMatrix::from_fn(6, 6, |i, j| if i == j { 2.0 } else { 0.1 * (i + j) as f64 });
        let sigma = DMatrix::from_fn(6, 6, |i, j| (i * j) as f64);
        let t = hat_trace(&b, &sigma, 0.0).unwrap();
        assert!((t - 6.0).abs() < 1e-10);
    }

    #[test]
    fn fdp_exact_trace_matches_dense_hat() {
        let n = 50;
        let lambda = 0.02;
        let sys = BandedSpdMatrix::second_difference_system(n, lambda).unwrap();
        let est = banded_hat_trace(&sys.factor().unwrap(), TracePolicy::Exact).unwrap();
        let dense = sys.to_dense().try_inverse().unwrap().trace();
        assert!(((est.value - dense) / dense).abs() < 1e-8);
        assert!(!est.stochastic);
    }

    #[test]
    fn hutchinson_is_seeded_and_close() {
        let n = 2000;
        let sys = BandedSpdMatrix::second_difference_system(n, 1e-3).unwrap();
        let f = sys.factor().unwrap();
        let policy = TracePolicy::Hutchinson {
            probes: HUTCHINSON_PROBES,
            seed: 7,
        };
        let a = banded_hat_trace(&f, policy).unwrap();
        let b = banded_hat_trace(&f, policy).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.stochastic);
        let exact = f.trace_inverse();
        assert!(((a.value - exact) / exact).abs() < 0.1);
    }

    #[test]
    fn general_matches_explicit_hat_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(n, m) in &[(40usize, 6usize), (200, 12), (30, 30)] {
            let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
            let g = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let sigma = &g * g.transpose();
            let lambda = 0.01;
            let t = hat_trace(&b, &sigma, lambda).unwrap();
            let brute = explicit_hat(&b, &sigma, lambda).trace();
            assert!((t - brute).abs() < 1e-8 * brute.max(1.0));
        }
    }
}
