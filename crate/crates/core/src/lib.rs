//! Intergenerational occupational mobility over a three-class partition.
//!
//! The crate is organised around the decomposition `P = Q·R` of an observed
//! father→child transition matrix `P` into a true-mobility matrix `Q`
//! (income incentives and opportunity sets) and a structural matrix `R`
//! (shifts in the occupational composition):
//!
//! - [`model`]: the random-utility model. Builds `Q` from parameters, inverts
//!   `Q` back to the six parameters and computes the mobility indexes.
//! - [`lp`]: a small dense two-phase simplex used to estimate `R`.
//! - [`estimation`]: the empirical pipeline (counts → `P` → `R` → `Q`),
//!   bootstrap standard errors and income premia.
//! - [`simulator`]: forward Monte-Carlo of the model, used as an oracle.
//! - [`io`]: CSV ingestion, cohort partitioning and report documents.

pub mod class;
pub mod estimation;
pub mod io;
pub mod lp;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod simulator;

pub use class::OccClass;
pub use matrix::{ClassShares, MatrixError, TransitionMatrix};
pub use model::{MobilityIndexes, ModelError, ModelParams, Primitives, Thresholds};
