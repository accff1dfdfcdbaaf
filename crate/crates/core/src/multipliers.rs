use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::problem::LotteryProblem;

/// Pooled multipliers `lambda` and per-action multipliers `gamma`.
///
/// `gamma` is stored action-major: entry `(j, a)` lives at `a * l + j`, so the
/// column of one action is contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierState {
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    num_per_action: usize,
}

impl MultiplierState {
    pub fn zeros(problem: &LotteryProblem) -> Self {
        Self::uniform(problem, 0.0, 0.0)
    }

    pub fn uniform(problem: &LotteryProblem, lambda: f64, gamma: f64) -> Self {
        let l = problem.num_per_action();
        Self {
            lambda: vec![lambda; problem.num_pooled()],
            gamma: vec![gamma; l * problem.num_actions()],
            num_per_action: l,
        }
    }

    pub fn from_parts(problem: &LotteryProblem, lambda: Vec<f64>, gamma: Vec<f64>) -> Result<Self, ProblemError> {
        let (m, l, n) = (problem.num_pooled(), problem.num_per_action(), problem.num_actions());
        if lambda.len() != m || gamma.len() != l * n {
            return Err(ProblemError::MultiplierShape { lambda: lambda.len(), gamma: gamma.len(), m, l, n });
        }
        let state = Self { lambda, gamma, num_per_action: l };
        if !state.is_projected() {
            return Err(ProblemError::NegativeMultiplier);
        }
        Ok(state)
    }

    pub fn check_shape(&self, problem: &LotteryProblem) -> Result<(), ProblemError> {
        let (m, l, n) = (problem.num_pooled(), problem.num_per_action(), problem.num_actions());
        if self.lambda.len() != m || self.gamma.len() != l * n || self.num_per_action != l {
            return Err(ProblemError::MultiplierShape { lambda: self.lambda.len(), gamma: self.gamma.len(), m, l, n });
        }
        Ok(())
    }

    pub fn num_per_action(&self) -> usize {
        self.num_per_action
    }

    pub fn gamma_column(&self, action: usize) -> &[f64] {
        let l = self.num_per_action;
        &self.gamma[action * l..(action + 1) * l]
    }

    pub fn gamma_column_mut(&mut self, action: usize) -> &mut [f64] {
        let l = self.num_per_action;
        &mut self.gamma[action * l..(action + 1) * l]
    }

    pub fn gamma_at(&self, j: usize, action: usize) -> f64 {
        self.gamma[action * self.num_per_action + j]
    }

    /// True when every entry is finite and nonnegative.
    /// Whether any multiplier in the action's column is nonzero.
    pub fn column_is_active(&self, action: usize) -> bool {
        self.gamma_column(action).iter().any(|&y| y != 0.0)
    }

    pub fn is_projected(&self) -> bool {
        self.lambda.iter().chain(&self.gamma).all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda.iter().chain(&self.gamma).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of squared entries.
    pub fn squared_norm(&self) -> f64 {
        self.lambda.iter().chain(&self.gamma).map(|v| v * v).sum()
    }

    /// Entrywise `(self + other) / 2`.
    pub fn midpoint(&self, other: &Self) -> Self {
        let mid = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        Self {
            lambda: mid(&self.lambda, &other.lambda),
            gamma: mid(&self.gamma, &other.gamma),
            num_per_action: self.num_per_action,
        }
    }
}
