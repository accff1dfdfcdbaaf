use crate::error::{EvalError, InnerError};
use crate::inner::{Argmax, InnerSolver};
use crate::multipliers::MultiplierState;
pub use crate::problem::Evaluation;
use crate::problem::LotteryProblem;

/// `f(a, c) - sum_i lambda_i g_i(a, c) - sum_j gamma_{j,a} h_j(a, c)` with
/// scaled `h`.
pub fn eval_lagrangian(
    problem: &LotteryProblem,
    action: usize,
    c: &[f64],
    mult: &MultiplierState,
) -> Result<f64, EvalError> {
    let eval = problem.evaluate(action, c)?;
    Ok(lagrangian_from(&eval, action, mult))
}

/// Lagrangian value from an evaluation already taken at `action`.
pub fn lagrangian_from(eval: &Evaluation, action: usize, mult: &MultiplierState) -> f64 {
    let pooled: f64 = mult.lambda.iter().zip(&eval.pooled).map(|(l, g)| l * g).sum();
    let per_action: f64 = mult.gamma_column(action).iter().zip(&eval.per_action).map(|(y, h)| y * h).sum();
    eval.payoff - pooled - per_action
}

/// `V(lambda, gamma)` and its maximizer as reported by `inner`.
pub fn dual_value(
    problem: &LotteryProblem,
    mult: &MultiplierState,
    inner: &dyn InnerSolver,
) -> Result<Argmax, InnerError> {
    inner.argmax(problem, mult)
}

/// One projected step along the constraint values at `argmax`.
///
/// Only the `gamma` column of the argmax action moves.
pub fn subgradient_step(
    problem: &LotteryProblem,
    mult: &MultiplierState,
    step: f64,
    argmax: &Argmax,
) -> Result<MultiplierState, EvalError> {
    let eval = problem.evaluate(argmax.action, &argmax.consumption)?;
    let mut next = mult.clone();
    apply_step(&mut next, step, argmax.action, &eval);
    Ok(next)
}

pub(crate) fn apply_step(mult: &mut MultiplierState, step: f64, action: usize, eval: &Evaluation) {
    for (l, g) in mult.lambda.iter_mut().zip(&eval.pooled) {
        *l = (*l + step * g).max(0.0);
    }
    for (y, h) in mult.gamma_column_mut(action).iter_mut().zip(&eval.per_action) {
        *y = (*y + step * h).max(0.0);
    }
}
