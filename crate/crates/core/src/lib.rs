//! Exact sparse ridge regression.
//!
//! Minimizes `½ Yᵀ(I + γ Σ_j s_j X_j X_jᵀ)⁻¹ Y` over supports `s` with at most
//! `k` entries (or with a per-entry penalty) by outer approximation: a
//! best-first branch-and-bound over a growing pool of gradient cuts, warm
//! started from a dual relaxation and closed with a ridge refit.
//!
//! ```
//! use sparsereg::{solve_cardinality, Dataset, SolveConfig};
//! use nalgebra::{DMatrix, DVector};
//!
//! let x = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.1, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
//! let y = DVector::from_column_slice(&[2.0, 0.1, 2.1, 0.0]);
//! let ds = Dataset::new(x, y).unwrap();
//! let fit = solve_cardinality(&ds, 1.0, 1, &SolveConfig::default()).unwrap();
//! assert_eq!(fit.support.indices(), &[0]);
//! ```

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod datagen;
pub mod error;
pub mod features;
pub mod linalg;
pub mod master;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod solver;
pub mod warmstart;

#[cfg(test)]
mod test_util;

pub use dataset::{Dataset, Support};
pub use error::{Error, Result};
pub use master::{Status, TreeMode};
pub use par::Exec;
pub use solver::{solve_cardinality, solve_penalized, SolveConfig, SolveResult, WarmStart};
