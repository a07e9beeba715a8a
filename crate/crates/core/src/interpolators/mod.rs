//! Linear interpolators `I(x; A, gamma)` used to rebuild a function from its
//! values at a knot set.

mod accuracy;
mod gp;
mod knots;
mod lagrange;
mod spline;

pub use accuracy::{interpolation_error, InterpolationError, MONTE_CARLO_POINTS};
pub use gp::{gp_basis_build, kernel_interp_eval, GpBasis, KernelExpansion, RegressionBasis};
pub use knots::KnotSet;
pub use lagrange::{lagrange_eval, LagrangeInterpolator};
pub use spline::{fit_cubic_spline, fit_natural_spline, SplineBoundary, SplineCoefficients};
