//! Model front-ends for the lottery solver: the static principal-agent
//! problem with hidden effort, a Mirrleesian income-tax economy with
//! two-dimensional types, and the discretized LP used to cross-check both.

pub mod error;
pub mod lp_build;
pub mod moral_hazard;
pub mod taxation;
pub mod welfare;

pub use error::ModelError;
pub use lp_build::{build_grid_lp, build_mh_lp, compare_oracle, GapReport, LpBuildOptions, MhLp};
pub use moral_hazard::{Example1, IcScaling, MhSolution, MoralHazardModel, MoralHazardParams};
pub use taxation::{IcMode, TaxEconomy, TaxInnerSolver, TaxRun, TaxSolution, TaxType, TypeMarginal};
pub use welfare::{first_best, welfare_account, FirstBest, WelfareAccount};
