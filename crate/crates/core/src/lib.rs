pub mod baselines;
pub mod benchmarks;
pub mod cli;
pub mod designs;
pub mod error;
pub mod estimators;
pub mod interpolators;
pub mod kernels;
pub mod numerics;

pub use error::{Error, Result};
