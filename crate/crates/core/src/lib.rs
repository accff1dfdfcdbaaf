//! Optimal lotteries for non-convex constrained planning problems.
//!
//! A [`LotteryProblem`] pairs a finite action set with a box of consumption
//! vectors, a payoff, pooled constraints `g_i <= 0` that hold in expectation
//! over the whole measure, and per-action constraints `h_j <= 0` that hold in
//! expectation conditional on each action. The solver runs projected
//! subgradient steps on the dual of the deterministic problem and rebuilds a
//! lottery from the frequencies of the inner maximizers.
//!
//! ```
//! use lottery_core::prelude::*;
//!
//! let problem = LotteryProblem::builder(vec![vec![0.0]], ConsumptionBox::uniform(1, 0.0, 1.0).unwrap())
//!     .payoff(|_, c| c[0])
//!     .pooled(|_, c| c[0] - 0.5)
//!     .build()
//!     .unwrap();
//! let grid = GridInnerSolver::new(problem.bounds(), &[101]).unwrap();
//! let schedule = StepSchedule::new(0.5, 0.0, 0.8).unwrap();
//! let init = MultiplierState::zeros(&problem);
//! let log = run_iteration_loop(&problem, init, &schedule, 2000, &grid).unwrap();
//! assert!((log.final_state.lambda[0] - 1.0).abs() < 0.05);
//! let lottery = construct_lottery(&problem, &log, Window::default_for(log.len()), 1e-2).unwrap();
//! assert!(lottery.eps_report.certified_eps.abs() < 0.05);
//! assert!((lottery.objective - 0.5).abs() < 0.05);
//! ```

pub mod certificate;
pub mod error;
pub mod inner;
pub mod iteration;
pub mod lagrangian;
pub mod lottery;
pub mod multipliers;
pub mod problem;
pub mod schedule;

pub use certificate::{certify_eps, EpsOptimalityReport};
pub use error::{EvalError, InnerError, LoopError, LotteryError, ProblemError};
pub use inner::foc::{ConcaveTransform, FocInnerSolver, LogTransform, PowerTransform, SeparableSpec};
pub use inner::grid::GridInnerSolver;
pub use inner::{Argmax, InnerSolver};
pub use iteration::{
    run_iteration_loop, run_iteration_loop_with, IterateLog, IterateRecord, LogDetail, LoopOptions, RunningBounds,
};
pub use lagrangian::{dual_value, eval_lagrangian, subgradient_step, Evaluation};
pub use lottery::{cluster_values, construct_lottery, Atom, LotterySolution, Window};
pub use multipliers::MultiplierState;
pub use problem::{ConsumptionBox, LotteryProblem, ProblemBuilder, ProblemFns};
pub use schedule::StepSchedule;

pub mod prelude {
    pub use crate::{
        construct_lottery, dual_value, eval_lagrangian, run_iteration_loop, subgradient_step, ConsumptionBox,
        GridInnerSolver, InnerSolver, LotteryProblem, MultiplierState, StepSchedule, Window,
    };
}
