//! SDD matrices and the chain-based box oracle.

mod chain;
mod mapping;
mod matrix;
mod oracle;
mod schur;
mod solve;
mod subset;

pub use chain::{build_chain, ChainConfig, ChainLevel, LevelSummary, SparsifierChain};
pub use mapping::{extension_rounds, VoltageExtension};
pub use matrix::SddMatrix;
pub use oracle::{ChainOracle, ExactBoxOracle, KOracle, PreparedOracle};
pub use schur::{schur_complement, DENSE_LIMIT};
pub use solve::{fast_solve, fast_solve_iterations, trivial_solve};
pub use subset::find_strong_subset;
