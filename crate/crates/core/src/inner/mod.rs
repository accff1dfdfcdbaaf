//! Maximizers of the Lagrangian over `A x C` for fixed multipliers.

pub mod foc;
pub mod grid;

use serde::{Deserialize, Serialize};

use crate::error::InnerError;
use crate::multipliers::MultiplierState;
use crate::problem::LotteryProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub action: usize,
    pub consumption: Vec<f64>,
    pub value: f64,
}

pub trait InnerSolver: Send + Sync {
    /// Maximizer of the Lagrangian. Ties go to the lowest action index, then
    /// to the lexicographically smallest consumption vector.
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError>;
}

impl<T: InnerSolver + ?Sized> InnerSolver for &T {
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError> {
        (**self).argmax(problem, mult)
    }
}

impl<T: InnerSolver + ?Sized> InnerSolver for Box<T> {
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError> {
        (**self).argmax(problem, mult)
    }
}
