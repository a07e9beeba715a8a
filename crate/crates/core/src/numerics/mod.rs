//! Dense and banded linear algebra shared by every estimator.
//!
//! Dense symmetric systems go through [`SpdFactorization`], which retries a
//! failed Cholesky with a small nugget (`0`, then `1e-10`, then `1e-8` times the
//! mean diagonal) and reports the jitter it used. The finite-difference
//! smoother's pentadiagonal system uses the O(n) [`BandedLdl`] path.

mod banded;
mod dense;
mod trace;

pub use banded::{banded_spd_solve, BandedLdl, BandedSpdMatrix};
pub(crate) use dense::symmetrize;
pub use dense::{spd_solve, SpdFactorization, SpdSolution, JITTER_LADDER};
pub use trace::{banded_hat_trace, hat_trace, TraceEstimate, TracePolicy, HUTCHINSON_PROBES};
