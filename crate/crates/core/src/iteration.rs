use serde::{Deserialize, Serialize};

use crate::error::LoopError;
use crate::inner::InnerSolver;
use crate::lagrangian::{apply_step, lagrangian_from};
use crate::multipliers::MultiplierState;
use crate::problem::{Evaluation, LotteryProblem};
use crate::schedule::StepSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub action: usize,
    pub consumption: Vec<f64>,
    pub step: f64,
    /// `V(lambda^k, gamma^k)`.
    pub dual_value: f64,
    /// `g_i(a^k, c^k)`; empty under [`LogDetail::Summary`].
    pub pooled: Vec<f64>,
    /// Scaled `h_j(a^k, c^k)`; empty under [`LogDetail::Summary`].
    pub per_action: Vec<f64>,
    /// `max_i |g_i(a^k, c^k)|`, zero without pooled constraints.
    pub max_abs_pooled: f64,
    /// `max_j |h_j(a^k, c^k)|`, zero without per-action constraints.
    pub max_abs_per_action: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningBounds {
    /// Running max of `|g_i|` and `|h_j|` over logged iterates.
    pub max_abs_constraint: f64,
    /// Running max of the sup-norm of the multipliers, initial state included.
    pub max_multiplier: f64,
    /// `sum lambda^2 + sum gamma^2` at the initial state.
    pub initial_energy: f64,
}

impl RunningBounds {
    /// `max_multiplier + initial_energy`.
    pub fn lambda_bar(&self) -> f64 {
        self.max_multiplier + self.initial_energy
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogDetail {
    /// Keep every constraint value per iterate.
    #[default]
    Full,
    /// Keep only the max-violation summaries.
    Summary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopOptions {
    pub detail: LogDetail,
    /// Copy the multipliers every this many iterations (before the update).
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateLog {
    pub records: Vec<IterateRecord>,
    pub schedule: StepSchedule,
    pub initial_state: MultiplierState,
    /// `(lambda^{N+1}, gamma^{N+1})`.
    pub final_state: MultiplierState,
    pub snapshots: Vec<(usize, MultiplierState)>,
    pub running_bounds: RunningBounds,
}

impl IterateLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn min_dual_value(&self) -> f64 {
        self.records.iter().map(|r| r.dual_value).fold(f64::INFINITY, f64::min)
    }

    pub fn step_sum(&self) -> f64 {
        self.records.iter().map(|r| r.step).sum()
    }
}

pub fn run_iteration_loop(
    problem: &LotteryProblem,
    init: MultiplierState,
    schedule: &StepSchedule,
    n_iters: usize,
    inner: &dyn InnerSolver,
) -> Result<IterateLog, LoopError> {
    run_iteration_loop_with(problem, init, schedule, n_iters, inner, LoopOptions::default())
}

pub fn run_iteration_loop_with(
    problem: &LotteryProblem,
    init: MultiplierState,
    schedule: &StepSchedule,
    n_iters: usize,
    inner: &dyn InnerSolver,
    options: LoopOptions,
) -> Result<IterateLog, LoopError> {
    if n_iters == 0 {
        return Err(LoopError::NoIterations);
    }
    init.check_shape(problem)?;
    if !init.is_projected() {
        return Err(crate::error::ProblemError::NegativeMultiplier.into());
    }
    let mut bounds =
        RunningBounds { max_abs_constraint: 0.0, max_multiplier: init.max_abs(), initial_energy: init.squared_norm() };
    let mut mult = init.clone();
    let mut records = Vec::with_capacity(n_iters);
    let mut snapshots = Vec::new();
    let mut eval = Evaluation::for_problem(problem);
    for k in 1..=n_iters {
        if let Some(every) = options.snapshot_every {
            if every > 0 && (k - 1) % every == 0 {
                snapshots.push((k, mult.clone()));
            }
        }
        let arg = inner.argmax(problem, &mult).map_err(|source| LoopError::Inner { k, source })?;
        problem
            .evaluate_into(arg.action, &arg.consumption, &mut eval)
            .map_err(|e| LoopError::Inner { k, source: e.into() })?;
        let dual_value = lagrangian_from(&eval, arg.action, &mult);
        let max_abs_pooled = eval.pooled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let max_abs_per_action = eval.per_action.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        bounds.max_abs_constraint = bounds.max_abs_constraint.max(max_abs_pooled).max(max_abs_per_action);

        let step = schedule.step(k);
        apply_step(&mut mult, step, arg.action, &eval);
        // Only lambda and the argmax column moved.
        let mut moved_max = 0.0f64;
        for &v in mult.lambda.iter().chain(mult.gamma_column(arg.action)) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LoopError::NonFiniteMultiplier { k });
            }
            moved_max = moved_max.max(v);
        }
        bounds.max_multiplier = bounds.max_multiplier.max(moved_max);

        let (pooled, per_action) = match options.detail {
            LogDetail::Full => (eval.pooled.clone(), eval.per_action.clone()),
            LogDetail::Summary => (Vec::new(), Vec::new()),
        };
        records.push(IterateRecord {
            k,
            action: arg.action,
            consumption: arg.consumption,
            step,
            dual_value,
            pooled,
            per_action,
            max_abs_pooled,
            max_abs_per_action,
        });
    }
    Ok(IterateLog {
        records,
        schedule: *schedule,
        initial_state: init,
        final_state: mult,
        snapshots,
        running_bounds: bounds,
    })
}
