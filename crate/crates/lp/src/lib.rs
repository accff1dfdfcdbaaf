//! Dense linear programs for cross-checking lottery solutions.
//!
//! Instances are assembled from sparse rows and solved by a dense two-phase
//! simplex with Bland's rule, which is slow but never cycles. Only small
//! instances are meant to be solved here; [`LpInstance::size`] reports the
//! dimensions of larger ones.

pub mod instance;
pub mod mps;
pub mod simplex;

pub use instance::{LpInstance, LpSize, SparseRow};
pub use mps::write_mps;
pub use simplex::{simplex_solve, simplex_solve_with, LpSolution, LpStatus, SimplexOptions};
