//! Matrix scaling and balancing.
//!
//! The main solvers are a box-constrained Newton method driven by an SDD
//! k-oracle ([`newton`], [`sdd`]) and an exponential-cone interior point method
//! ([`ipm`]). Classical Sinkhorn and Osborne iterations live in [`baseline`].

pub mod baseline;
pub mod error;
pub mod generate;
pub mod ipm;
pub mod matrix;
pub mod newton;
pub mod objective;
pub mod sdd;
pub mod solution;

pub use error::{Error, Result};
pub use matrix::{DiagonalFactors, MatrixStats, SparseMatrix};
pub use solution::{FactorsResult, TraceRecord};
