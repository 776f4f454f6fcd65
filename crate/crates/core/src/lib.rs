//! Tuning-parameter selection for high-dimensional lasso regression.
//!
//! The crate is `no_std` (it needs `alloc`). It covers synthetic data
//! generation, the lasso / ridge / least-squares solvers, high-dimensional
//! noise-variance estimators, the tuning-parameter selectors built on top of
//! them, and the evaluation metrics used to compare those selectors.
//!
//! All randomness flows through caller-supplied seeds, so every routine is a
//! pure function of its inputs.

#![no_std]
// Numeric guards use `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod quantile;
pub mod selectors;
pub mod solvers;
pub mod variance;

pub use datagen::{NoiseKind, ScenarioConfig, SimulatedDataset};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use selectors::{MethodId, SelectionResult};
pub use solvers::{FittedModel, LambdaGrid, LassoPath};
pub use variance::{VarianceEstimate, VarianceKind};
